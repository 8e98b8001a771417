#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace bbo {

enum class ParamKind { Real, Integer, Categorical, Boolean };
enum class Scale { Linear, Log };

/// One hyperparameter domain: a bounded real or integer (optionally
/// log-scaled), a categorical with named choices, or a boolean.
struct ParamSpec {
    std::string name;
    ParamKind kind = ParamKind::Real;
    double low = 0.0;
    double high = 1.0;
    std::vector<std::string> choices;
    Scale scale = Scale::Linear;

    static ParamSpec real(std::string name, double low, double high,
                          Scale scale = Scale::Linear);
    static ParamSpec integer(std::string name, std::int64_t low, std::int64_t high,
                             Scale scale = Scale::Linear);
    static ParamSpec categorical(std::string name, std::vector<std::string> choices);
    static ParamSpec boolean(std::string name);

    /// Width of this spec's block in the warped view: 1, or one-hot width.
    std::size_t warped_width() const;

    bool operator==(const ParamSpec&) const = default;
};

/// A native parameter value: number, choice label, or flag.
using ParamValue = std::variant<double, std::int64_t, bool, std::string>;

/// A point in a search space, keyed by spec name.
struct ParamVector {
    std::map<std::string, ParamValue> values;

    bool operator==(const ParamVector&) const = default;
};

/// A point in the warped unit hypercube.
struct UnitVector {
    std::vector<double> coords;

    bool operator==(const UnitVector&) const = default;
};

/// Block layout entry: where a spec's coordinates live in the warped view.
struct WarpedBlock {
    std::size_t spec_index;
    std::size_t offset;
    std::size_t width;

    bool operator==(const WarpedBlock&) const = default;
};

/// An ordered collection of ParamSpecs together with the warped
/// unit-cube view every optimizer reasons in.
class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<ParamSpec> specs);

    const std::vector<ParamSpec>& specs() const noexcept { return specs_; }
    const std::vector<WarpedBlock>& blocks() const noexcept { return blocks_; }
    std::size_t warped_dim() const noexcept { return warped_dim_; }
    std::size_t size() const noexcept { return specs_.size(); }

    /// Throws DomainError if p does not carry exactly one in-domain value
    /// per spec. The message names the offending spec.
    void validate(const ParamVector& p) const;

    bool operator==(const SearchSpace&) const = default;

private:
    std::vector<ParamSpec> specs_;
    std::vector<WarpedBlock> blocks_;
    std::size_t warped_dim_ = 0;
};

UnitVector warp(const SearchSpace& space, const ParamVector& p);
ParamVector unwarp(const SearchSpace& space, const UnitVector& u);

std::vector<ParamVector> sample_uniform(const SearchSpace& space, std::size_t n,
                                        std::uint64_t seed);

/// Stratified samples: per non-categorical warped coordinate the n points
/// occupy n distinct equal-width strata, jittered within each.
std::vector<ParamVector> latin_hypercube(const SearchSpace& space, std::size_t n,
                                         std::uint64_t seed);

/// Warped-view equivalents used by the model-based optimizers.
std::vector<UnitVector> sample_uniform_warped(const SearchSpace& space, std::size_t n,
                                              class Rng& rng);
std::vector<UnitVector> latin_hypercube_warped(const SearchSpace& space, std::size_t n,
                                               class Rng& rng);

/// Space definition file format (see README): {"params": [...]}.
std::string space_to_json(const SearchSpace& space);
SearchSpace space_from_json(const std::string& text);

/// Param (de)serialization against a space, used by trial logs and the
/// child-process protocol.
std::string params_to_json(const ParamVector& p);
ParamVector params_from_json(const SearchSpace& space, const std::string& text);

} // namespace bbo
