#pragma once

#include <string>
#include <string_view>

namespace occdet {

enum class DecayKind { None, Sigmoid, Ramp, Cosine };

/// Monotone map f: [0,1] -> [0,1] applied to the visible ratio of a sample.
///
/// Construct through the named factories or `parse`; they reject invalid
/// parameters, so `eval_decay` never has to.
///
///   none            f(x) = 1
///   sigmoid:B,A     normalized logistic, (s(x) - s(0)) / (s(1) - s(0)),
///                   s(x) = 1 / (1 + exp(-B (x - A))), B > 0, A in (0,1)
///   ramp:X1,X2      0 below X1, 1 above X2, linear in between, X1 < X2
///   cosine          f(x) = 0.5 - 0.5 cos(pi x)
class DecaySpec {
public:
    DecaySpec() = default;

    static DecaySpec none();
    static DecaySpec sigmoid(double beta, double alpha = 0.5);
    static DecaySpec ramp(double x1, double x2);
    static DecaySpec cosine();

    /// Parses the textual form listed above. Throws std::invalid_argument.
    static DecaySpec parse(std::string_view text);

    DecayKind kind() const { return kind_; }
    double beta() const { return p0_; }
    double alpha() const { return p1_; }
    double ramp_low() const { return p0_; }
    double ramp_high() const { return p1_; }

    /// Canonical text, accepted back by `parse`.
    std::string to_string() const;

    friend bool operator==(const DecaySpec&, const DecaySpec&) = default;

private:
    DecaySpec(DecayKind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {}

    DecayKind kind_ = DecayKind::None;
    double p0_ = 0.0;
    double p1_ = 0.0;
};

/// Evaluates f(x); x outside [0,1] is clamped first.
double eval_decay(const DecaySpec& spec, double x);

}  // namespace occdet
