#include "occdet/decay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace occdet {

namespace {

double logistic(double beta, double alpha, double x)
{
    return 1.0 / (1.0 + std::exp(-beta * (x - alpha)));
}

std::vector<double> parse_params(std::string_view text, std::string_view whole)
{
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view tok = text.substr(0, comma);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
            throw std::invalid_argument("bad decay parameter in '" + std::string(whole) + "'");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) {
            break;
        }
        text.remove_prefix(comma + 1);
        if (text.empty()) {
            throw std::invalid_argument("trailing comma in '" + std::string(whole) + "'");
        }
    }
    return out;
}

}  // namespace

DecaySpec DecaySpec::none()
{
    return DecaySpec{};
}

DecaySpec DecaySpec::sigmoid(double beta, double alpha)
{
    if (!(std::isfinite(beta) && beta > 0.0)) {
        throw std::invalid_argument("sigmoid decay needs beta > 0");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("sigmoid decay needs alpha in (0,1)");
    }
    if (!(logistic(beta, alpha, 1.0) - logistic(beta, alpha, 0.0) > 0.0)) {
        throw std::invalid_argument("sigmoid decay is numerically flat for these parameters");
    }
    return DecaySpec{DecayKind::Sigmoid, beta, alpha};
}

DecaySpec DecaySpec::ramp(double x1, double x2)
{
    if (!(std::isfinite(x1) && std::isfinite(x2) && x1 < x2)) {
        throw std::invalid_argument("ramp decay needs finite x1 < x2");
    }
    return DecaySpec{DecayKind::Ramp, x1, x2};
}

DecaySpec DecaySpec::cosine()
{
    return DecaySpec{DecayKind::Cosine, 0.0, 0.0};
}

DecaySpec DecaySpec::parse(std::string_view text)
{
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::vector<double> params =
        colon == std::string_view::npos ? std::vector<double>{} : parse_params(text.substr(colon + 1), text);
    if (colon != std::string_view::npos && params.empty()) {
        throw std::invalid_argument("missing decay parameters in '" + std::string(text) + "'");
    }

    if (name == "none" && params.empty()) {
        return none();
    }
    if (name == "cosine" && params.empty()) {
        return cosine();
    }
    if (name == "sigmoid" && (params.size() == 1 || params.size() == 2)) {
        return sigmoid(params[0], params.size() == 2 ? params[1] : 0.5);
    }
    if ((name == "ramp" || name == "relu") && params.size() == 2) {
        return ramp(params[0], params[1]);
    }
    throw std::invalid_argument("unknown decay spec '" + std::string(text) +
                                "' (expected none, cosine, sigmoid:<beta>,<alpha>, ramp:<x1>,<x2>)");
}

std::string DecaySpec::to_string() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
    case DecayKind::None:
        return "none";
    case DecayKind::Cosine:
        return "cosine";
    case DecayKind::Sigmoid:
        os << "sigmoid:" << p0_ << ',' << p1_;
        return os.str();
    case DecayKind::Ramp:
        os << "ramp:" << p0_ << ',' << p1_;
        return os.str();
    }
    return "none";
}

double eval_decay(const DecaySpec& spec, double x)
{
    x = std::clamp(x, 0.0, 1.0);
    switch (spec.kind()) {
    case DecayKind::None:
        return 1.0;
    case DecayKind::Sigmoid: {
        const double s0 = logistic(spec.beta(), spec.alpha(), 0.0);
        const double s1 = logistic(spec.beta(), spec.alpha(), 1.0);
        return std::clamp((logistic(spec.beta(), spec.alpha(), x) - s0) / (s1 - s0), 0.0, 1.0);
    }
    case DecayKind::Ramp:
        if (x <= spec.ramp_low()) {
            return 0.0;
        }
        if (x >= spec.ramp_high()) {
            return 1.0;
        }
        return (x - spec.ramp_low()) / (spec.ramp_high() - spec.ramp_low());
    case DecayKind::Cosine:
        return std::clamp(0.5 - 0.5 * std::cos(std::numbers::pi * x), 0.0, 1.0);
    }
    return 1.0;
}

}  // namespace occdet
