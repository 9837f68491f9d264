#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mmscat/core.hpp"

namespace mmscat {

/// Hermitian matrix potential V(x) on [0, inf).
///
/// Presets are evaluated in closed form. Sampled potentials use monotone
/// (Fritsch-Carlson) cubic interpolation per real/imaginary entry and an
/// exponential tail past the last sample.
class HermitianPotential {
  public:
    using Evaluator = std::function<void(double, Eigen::Ref<ComplexMatrix>)>;

    enum class Kind { zero, sech2, exp_decay, sampled, custom };

    static HermitianPotential zero(int n);
    /// V(x) = -2 kappa^2 sech^2(kappa x) I_n
    static HermitianPotential sech2(int n, double kappa);
    /// V(x) = exp(-rate x) H with H Hermitian
    static HermitianPotential exp_decay(const ComplexMatrix& h, double rate);
    static HermitianPotential sampled(std::vector<double> x, std::vector<ComplexMatrix> v);
    /// Arbitrary evaluator. The Hermitian check samples [0, 10] unless disabled;
    /// disabling it is only meant for tests that need a broken potential.
    static HermitianPotential custom(int n, Evaluator f, std::string name = "custom",
                                     bool check_hermitian = true);

    int dim() const { return n_; }
    Kind kind() const { return kind_; }
    std::string kind_name() const;

    void evaluate(double x, Eigen::Ref<ComplexMatrix> out) const { eval_(x, out); }
    ComplexMatrix operator()(double x) const
    {
        ComplexMatrix v(n_, n_);
        eval_(x, v);
        return v;
    }

    bool is_zero() const { return kind_ == Kind::zero; }

    // preset parameters (meaningful for the matching kind only)
    double kappa() const { return kappa_; }
    double rate() const { return rate_; }
    const ComplexMatrix& coefficient() const { return coeff_; }
    const std::vector<double>& sample_x() const { return xs_; }
    const std::vector<ComplexMatrix>& sample_v() const { return vs_; }
    double tail_rate() const { return tail_rate_; }

    /// int_0^x_max (1 + x) ||V(x)|| dx by composite Simpson on `panels` panels.
    double weighted_norm(double x_max, int panels = 2000) const;
    /// max ||V(x)|| over a uniform sampling of [0, x_max].
    double sup_norm(double x_max, int samples = 2001) const;

  private:
    HermitianPotential() = default;

    int n_ = 1;
    Kind kind_ = Kind::zero;
    std::string name_;
    Evaluator eval_;
    double kappa_ = 0, rate_ = 0, tail_rate_ = 0;
    ComplexMatrix coeff_;
    std::vector<double> xs_;
    std::vector<ComplexMatrix> vs_;
};

} // namespace mmscat
