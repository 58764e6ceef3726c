#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mpgk {

/// First letter: aggregation over neighborhoods, second: over graph vertex
/// sets. R = R-convolution sum, A = optimal assignment.
enum class Variant { RR, RA, AR, AA };

enum class BaseKernel { delta, linear, delta_plus_linear, degree };

inline bool neighborhood_is_assignment(Variant v) { return v == Variant::AR || v == Variant::AA; }
inline bool graph_is_assignment(Variant v) { return v == Variant::RA || v == Variant::AA; }

std::string to_string(Variant v);
std::string to_string(BaseKernel b);
/// Case-insensitive. Throws ConfigError on unknown names.
Variant parse_variant(std::string_view s);
BaseKernel parse_base_kernel(std::string_view s);

struct KernelParams {
    double alpha = 0.8;
    double beta = 0.2;
    int iterations = 4;
    Variant variant = Variant::RR;
    BaseKernel base_kernel = BaseKernel::delta;
    /// Nyström landmark count; nullopt selects the exact dense mode.
    std::optional<std::size_t> landmarks;
    int hierarchy_depth = 4;
    int hierarchy_branching = 4;
    int kmeans_max_iter = 50;
    std::uint64_t seed = 0;
    bool normalize = false;

    bool exact() const { return !landmarks.has_value(); }
    /// Throws ParameterError on the first broken constraint.
    void check() const;
};

}  // namespace mpgk
