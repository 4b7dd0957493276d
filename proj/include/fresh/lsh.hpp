#ifndef FRESH_LSH_HPP
#define FRESH_LSH_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "fresh/curves.hpp"

namespace fresh {

// ---------------------------------------------------------------------------
// Randomness

/// Counter-based generator: every (seed, stream, counter) triple maps to a
/// fixed 64-bit value, independent of evaluation order or platform.
std::uint64_t counter_random(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform double in [0, 1) from counter_random.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Stream numbering for grid shifts: `group` selects the family user
/// (0 and 1 are the two tensoring groups of an index, higher values are used
/// by the experiments), `slot` the table or trial, `concat` the position in a
/// concatenation.
std::uint64_t grid_stream(std::uint64_t group, std::uint64_t slot, std::uint64_t concat);

// ---------------------------------------------------------------------------
// Grid hashing

/// A randomly shifted grid of side delta. Each vertex snaps to its closest
/// grid vertex j*delta + shift, identified by the integer tuple j.
struct GridHash {
    double delta = 1.0;
    std::vector<double> shift;

    /// Draws shift_c uniform in [0, delta) from the given stream.
    static GridHash draw(double delta, std::size_t dim, std::uint64_t seed, std::uint64_t stream);

    std::int64_t cell(double x, std::size_t coord) const;
};

/// Cell tuples of a curve snapped to one or more grids. Consecutive duplicate
/// tuples are removed within each grid; `grid_ends[g]` is the tuple count
/// after grid g.
struct Signature {
    std::size_t dim = 0;
    std::vector<std::int64_t> cells;
    std::vector<std::size_t> grid_ends;

    std::size_t length() const { return dim == 0 ? 0 : cells.size() / dim; }
    friend bool operator==(const Signature&, const Signature&) = default;
};

Signature snap_signature(std::span<const GridHash> grids, const Curve& p);

/// Rolling polynomial over per-coordinate mixed words, finished by
/// multiply-shift from 64 to 32 bits.
struct SequenceHasher {
    static constexpr unsigned kWordBits = 64;
    static constexpr unsigned kKeyBits = 32;

    /// Odd multiplier, used both for the rolling accumulator and the final
    /// multiply-shift step.
    std::uint64_t a = 0x9e3779b97f4a7c15ULL;

    static SequenceHasher draw(std::uint64_t seed);

    /// The per-coordinate mixer applied to each cell coordinate.
    static std::uint64_t mix(std::int64_t cell, std::size_t coord);
    /// Word appended after each grid's tuples.
    static constexpr std::uint64_t kGridSeparator = 0xd6e8feb86659fd93ULL;

    /// (a * x mod 2^64) >> (u - v).
    std::uint32_t finalize(std::uint64_t acc) const {
        return static_cast<std::uint32_t>((a * acc) >> (kWordBits - kKeyBits));
    }
};

/// Accumulator state of a fold, with a^(words absorbed) so that folds of
/// consecutive signature pieces can be joined: fold(AB) = fold(A)*a^|B| + fold(B).
struct PartialFold {
    std::uint64_t acc = 0;
    std::uint64_t power = 1;

    PartialFold then(const PartialFold& next) const {
        return {acc * next.power + next.acc, power * next.power};
    }
};

PartialFold fold_signature(const SequenceHasher& h, const Signature& s);

/// Snaps and folds in a single streaming pass, without materializing the
/// signature. Equal to fold_signature(h, snap_signature(grids, p)). When
/// given, `evaluations` is incremented once per grid pass.
PartialFold fold_curve(const SequenceHasher& h, std::span<const GridHash> grids, const Curve& p,
                       std::uint64_t* evaluations = nullptr);

std::uint32_t fold_key(const SequenceHasher& h, const Signature& s);

// ---------------------------------------------------------------------------
// Index

struct LshParams {
    double delta = 1.0;
    unsigned k = 2;
    /// Effective table count, a perfect square side * side.
    unsigned tables = 1024;
    unsigned side = 32;
    std::size_t dim = 1;
    std::uint64_t seed = 0;

    /// Rounds the requested table count up to the next perfect square.
    static LshParams make(double delta, unsigned k, unsigned requested_tables, std::size_t dim,
                          std::uint64_t seed);

    /// Concatenation counts for the two tensoring groups.
    unsigned first_group_k() const { return (k + 1) / 2; }
    unsigned second_group_k() const { return k / 2; }

    void validate() const;
    friend bool operator==(const LshParams&, const LshParams&) = default;
};

struct ScoredCandidate {
    CurveId id;
    std::uint32_t collisions;
    double score;
    friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

class IndexLoadError : public std::runtime_error {
   public:
    enum class Kind { Io, BadMagic, BadVersion, Truncated, Corrupt, FingerprintMismatch };
    IndexLoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

   private:
    Kind kind_;
};

class LshIndex {
   public:
    const LshParams& params() const { return params_; }
    std::size_t size() const { return n_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    /// Grid-hash evaluations (one snapping pass of one curve over one grid)
    /// performed while building.
    std::uint64_t grid_evaluations() const { return grid_evaluations_; }
    const SequenceHasher& hasher() const { return hasher_; }
    const std::vector<GridHash>& first_group(unsigned slot) const { return first_[slot]; }
    const std::vector<GridHash>& second_group(unsigned slot) const { return second_[slot]; }

    /// Number of distinct keys, summed over tables.
    std::size_t bucket_count() const;

    bool same_tables(const LshIndex& other) const;

    friend LshIndex build_index(const Dataset& s, const LshParams& params, int threads);
    friend std::vector<ScoredCandidate> query_scores(const LshIndex& idx, const Curve& q);
    friend void save_index(const LshIndex& idx, const std::filesystem::path& path);
    friend LshIndex load_index(const std::filesystem::path& path, const Dataset& s);

   private:
    struct Table {
        std::vector<std::uint32_t> keys;     // sorted, distinct
        std::vector<std::uint32_t> offsets;  // keys.size() + 1
        std::vector<CurveId> ids;
        friend bool operator==(const Table&, const Table&) = default;
    };

    void draw_hashes();
    /// Partial folds of q under both groups.
    void fold_groups(const Curve& q, std::vector<PartialFold>& first,
                     std::vector<PartialFold>& second) const;

    LshParams params_;
    SequenceHasher hasher_;
    std::vector<std::vector<GridHash>> first_;
    std::vector<std::vector<GridHash>> second_;
    std::vector<Table> tables_;
    std::size_t n_ = 0;
    std::uint64_t fingerprint_ = 0;
    std::uint64_t grid_evaluations_ = 0;
};

/// Builds the tensored index. `threads` <= 0 uses the OpenMP default.
LshIndex build_index(const Dataset& s, const LshParams& params, int threads = 0);

/// Candidates with at least one collision, sorted by (score, id) ascending.
std::vector<ScoredCandidate> query_scores(const LshIndex& idx, const Curve& q);

void save_index(const LshIndex& idx, const std::filesystem::path& path);
LshIndex load_index(const std::filesystem::path& path, const Dataset& s);

}  // namespace fresh

#endif
