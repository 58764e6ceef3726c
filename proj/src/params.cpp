#include "mpgk/params.hpp"

#include <algorithm>
#include <cctype>

#include "mpgk/error.hpp"

namespace mpgk {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::RR: return "RR";
        case Variant::RA: return "RA";
        case Variant::AR: return "AR";
        case Variant::AA: return "AA";
    }
    return "?";
}

std::string to_string(BaseKernel b) {
    switch (b) {
        case BaseKernel::delta: return "delta";
        case BaseKernel::linear: return "linear";
        case BaseKernel::delta_plus_linear: return "delta_plus_linear";
        case BaseKernel::degree: return "degree";
    }
    return "?";
}

Variant parse_variant(std::string_view s) {
    const std::string l = lower(s);
    if (l == "rr") return Variant::RR;
    if (l == "ra") return Variant::RA;
    if (l == "ar") return Variant::AR;
    if (l == "aa") return Variant::AA;
    throw ConfigError("unknown variant '" + std::string(s) + "' (expected RR, RA, AR or AA)");
}

BaseKernel parse_base_kernel(std::string_view s) {
    const std::string l = lower(s);
    if (l == "delta") return BaseKernel::delta;
    if (l == "linear") return BaseKernel::linear;
    if (l == "delta_plus_linear" || l == "delta+linear") return BaseKernel::delta_plus_linear;
    if (l == "degree") return BaseKernel::degree;
    throw ConfigError("unknown base kernel '" + std::string(s) + "'");
}

void KernelParams::check() const {
    if (!(alpha >= 0.0)) throw ParameterError("alpha must be nonnegative");
    if (!(beta >= 0.0)) throw ParameterError("beta must be nonnegative");
    if (iterations < 1) throw ParameterError("iterations T must be >= 1");
    if (landmarks && *landmarks < 1) throw ParameterError("landmark count m must be >= 1");
    if (hierarchy_depth < 1) throw ParameterError("hierarchy depth must be >= 1");
    if (hierarchy_branching < 2) throw ParameterError("hierarchy branching must be >= 2");
    if (kmeans_max_iter < 1) throw ParameterError("k-means max_iter must be >= 1");
}

}  // namespace mpgk
