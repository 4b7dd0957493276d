#include "fresh/lsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <omp.h>

namespace fresh {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

constexpr std::uint64_t kCoordinateMix[8] = {
    0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
    0x082efa98ec4e6c89ULL, 0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL,
    0xc0ac29b7c97c50ddULL, 0x3f84d5b5b5470917ULL,
};

constexpr std::uint64_t kHasherGroup = 0xff;

// Binary helpers: little-endian fixed-width integers.
class Writer {
   public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char* s, std::size_t n) { bytes_.append(s, n); }
    const std::string& bytes() const { return bytes_; }

   private:
    std::string bytes_;
};

class Reader {
   public:
    explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
    std::uint64_t unsigned_le(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
    std::uint64_t u64() { return unsigned_le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

   private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw IndexLoadError(IndexLoadError::Kind::Truncated, "index file is truncated");
    }
    std::string bytes_;
    std::size_t pos_ = 0;
};

constexpr char kMagic[5] = {'F', 'R', 'S', 'H', '1'};
constexpr std::uint32_t kFormatVersion = 1;

/// Snaps one curve to one grid, calling emit(tuple) for each tuple that
/// differs from its predecessor.
template <typename Emit>
void snap_one(const GridHash& g, const Curve& p, std::vector<std::int64_t>& prev,
              std::vector<std::int64_t>& cur, Emit&& emit) {
    const std::size_t dim = p.dim();
    prev.assign(dim, 0);
    cur.assign(dim, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto v = p[i];
        for (std::size_t c = 0; c < dim; ++c) cur[c] = g.cell(v[c], c);
        if (i == 0 || cur != prev) {
            emit(cur);
            std::swap(prev, cur);
        }
    }
}

}  // namespace

std::uint64_t counter_random(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t x = splitmix(seed);
    x = splitmix(x ^ stream);
    x = splitmix(x ^ counter);
    return x;
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(counter_random(seed, stream, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t grid_stream(std::uint64_t group, std::uint64_t slot, std::uint64_t concat) {
    return (group << 56) ^ (slot << 16) ^ concat;
}

GridHash GridHash::draw(double delta, std::size_t dim, std::uint64_t seed, std::uint64_t stream) {
    GridHash g;
    g.delta = delta;
    g.shift.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        double t = delta * counter_uniform(seed, stream, c);
        if (t >= delta) t = std::nextafter(delta, 0.0);
        g.shift[c] = t;
    }
    return g;
}

std::int64_t GridHash::cell(double x, std::size_t coord) const {
    return static_cast<std::int64_t>(std::floor((x - shift[coord]) / delta + 0.5));
}

Signature snap_signature(std::span<const GridHash> grids, const Curve& p) {
    Signature s;
    s.dim = p.dim();
    std::vector<std::int64_t> prev, cur;
    for (const auto& g : grids) {
        if (g.shift.size() != p.dim()) throw std::invalid_argument("grid and curve dimension differ");
        snap_one(g, p, prev, cur,
                 [&](const std::vector<std::int64_t>& t) { s.cells.insert(s.cells.end(), t.begin(), t.end()); });
        s.grid_ends.push_back(s.length());
    }
    return s;
}

SequenceHasher SequenceHasher::draw(std::uint64_t seed) {
    SequenceHasher h;
    h.a = counter_random(seed, grid_stream(kHasherGroup, 0, 0), 0) | 1ULL;
    return h;
}

std::uint64_t SequenceHasher::mix(std::int64_t cell, std::size_t coord) {
    return fmix64(static_cast<std::uint64_t>(cell) ^ kCoordinateMix[coord & 7] ^ coord);
}

PartialFold fold_signature(const SequenceHasher& h, const Signature& s) {
    PartialFold f;
    std::size_t begin = 0;
    for (std::size_t end : s.grid_ends) {
        for (std::size_t t = begin; t < end; ++t)
            for (std::size_t c = 0; c < s.dim; ++c) {
                f.acc = f.acc * h.a + SequenceHasher::mix(s.cells[t * s.dim + c], c);
                f.power *= h.a;
            }
        f.acc = f.acc * h.a + SequenceHasher::kGridSeparator;
        f.power *= h.a;
        begin = end;
    }
    return f;
}

PartialFold fold_curve(const SequenceHasher& h, std::span<const GridHash> grids, const Curve& p,
                       std::uint64_t* evaluations) {
    PartialFold f;
    std::vector<std::int64_t> prev, cur;
    for (const auto& g : grids) {
        if (evaluations) ++*evaluations;
        snap_one(g, p, prev, cur, [&](const std::vector<std::int64_t>& t) {
            for (std::size_t c = 0; c < t.size(); ++c) {
                f.acc = f.acc * h.a + SequenceHasher::mix(t[c], c);
                f.power *= h.a;
            }
        });
        f.acc = f.acc * h.a + SequenceHasher::kGridSeparator;
        f.power *= h.a;
    }
    return f;
}

std::uint32_t fold_key(const SequenceHasher& h, const Signature& s) {
    return h.finalize(fold_signature(h, s).acc);
}

// ---------------------------------------------------------------------------

LshParams LshParams::make(double delta, unsigned k, unsigned requested_tables, std::size_t dim,
                          std::uint64_t seed) {
    if (requested_tables == 0) throw std::invalid_argument("table count must be >= 1");
    unsigned side = static_cast<unsigned>(std::sqrt(static_cast<double>(requested_tables)));
    while (side * side < requested_tables) ++side;
    while (side > 1 && (side - 1) * (side - 1) >= requested_tables) --side;
    LshParams p;
    p.delta = delta;
    p.k = k;
    p.side = side;
    p.tables = side * side;
    p.dim = dim;
    p.seed = seed;
    p.validate();
    return p;
}

void LshParams::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("grid side must be > 0");
    if (k < 1) throw std::invalid_argument("concatenation count k must be >= 1");
    if (side < 1 || tables != side * side)
        throw std::invalid_argument("table count must be a perfect square");
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

std::size_t LshIndex::bucket_count() const {
    std::size_t total = 0;
    for (const auto& t : tables_) total += t.keys.size();
    return total;
}

bool LshIndex::same_tables(const LshIndex& other) const {
    return params_ == other.params_ && n_ == other.n_ && tables_ == other.tables_;
}

void LshIndex::draw_hashes() {
    hasher_ = SequenceHasher::draw(params_.seed);
    first_.assign(params_.side, {});
    second_.assign(params_.side, {});
    for (unsigned slot = 0; slot < params_.side; ++slot) {
        for (unsigned c = 0; c < params_.first_group_k(); ++c)
            first_[slot].push_back(GridHash::draw(params_.delta, params_.dim, params_.seed,
                                                  grid_stream(0, slot, c)));
        for (unsigned c = 0; c < params_.second_group_k(); ++c)
            second_[slot].push_back(GridHash::draw(params_.delta, params_.dim, params_.seed,
                                                   grid_stream(1, slot, c)));
    }
}

void LshIndex::fold_groups(const Curve& q, std::vector<PartialFold>& first,
                           std::vector<PartialFold>& second) const {
    first.resize(params_.side);
    second.resize(params_.side);
    for (unsigned slot = 0; slot < params_.side; ++slot) {
        first[slot] = fold_curve(hasher_, first_[slot], q);
        second[slot] = fold_curve(hasher_, second_[slot], q);
    }
}

LshIndex build_index(const Dataset& s, const LshParams& params, int threads) {
    params.validate();
    if (s.empty()) throw std::invalid_argument("cannot index an empty dataset");
    if (s.dim != params.dim) throw std::invalid_argument("index and dataset dimension differ");
    if (threads <= 0) threads = omp_get_max_threads();

    LshIndex idx;
    idx.params_ = params;
    idx.n_ = s.size();
    idx.fingerprint_ = s.fingerprint();
    idx.draw_hashes();

    const std::size_t n = s.size();
    const unsigned side = params.side;
    std::vector<PartialFold> folds1(n * side), folds2(n * side);
    const auto signed_n = static_cast<std::int64_t>(n);
    std::uint64_t evaluations = 0;

#pragma omp parallel for schedule(dynamic, 16) num_threads(threads) reduction(+ : evaluations)
    for (std::int64_t ci = 0; ci < signed_n; ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        for (unsigned slot = 0; slot < side; ++slot) {
            folds1[c * side + slot] = fold_curve(idx.hasher_, idx.first_[slot], s[c], &evaluations);
            folds2[c * side + slot] = fold_curve(idx.hasher_, idx.second_[slot], s[c], &evaluations);
        }
    }
    idx.grid_evaluations_ = evaluations;

    idx.tables_.assign(params.tables, {});
    const auto signed_tables = static_cast<std::int64_t>(params.tables);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::int64_t ti = 0; ti < signed_tables; ++ti) {
        const auto t = static_cast<std::size_t>(ti);
        const std::size_t i = t / side;
        const std::size_t j = t % side;
        std::vector<std::pair<std::uint32_t, CurveId>> entries(n);
        for (std::size_t c = 0; c < n; ++c) {
            const PartialFold f = folds1[c * side + i].then(folds2[c * side + j]);
            entries[c] = {idx.hasher_.finalize(f.acc), static_cast<CurveId>(c)};
        }
        std::sort(entries.begin(), entries.end());
        auto& table = idx.tables_[t];
        table.ids.reserve(n);
        for (std::size_t e = 0; e < n; ++e) {
            if (e == 0 || entries[e].first != entries[e - 1].first) {
                table.keys.push_back(entries[e].first);
                table.offsets.push_back(static_cast<std::uint32_t>(e));
            }
            table.ids.push_back(entries[e].second);
        }
        table.offsets.push_back(static_cast<std::uint32_t>(n));
    }
    return idx;
}

std::vector<ScoredCandidate> query_scores(const LshIndex& idx, const Curve& q) {
    if (q.dim() != idx.params_.dim) throw std::invalid_argument("query and index dimension differ");
    std::vector<PartialFold> first, second;
    idx.fold_groups(q, first, second);

    const unsigned side = idx.params_.side;
    std::vector<CurveId> hits;
    for (unsigned i = 0; i < side; ++i) {
        for (unsigned j = 0; j < side; ++j) {
            const auto& table = idx.tables_[std::size_t(i) * side + j];
            const std::uint32_t key = idx.hasher_.finalize(first[i].then(second[j]).acc);
            const auto it = std::lower_bound(table.keys.begin(), table.keys.end(), key);
            if (it == table.keys.end() || *it != key) continue;
            const auto b = static_cast<std::size_t>(it - table.keys.begin());
            hits.insert(hits.end(), table.ids.begin() + table.offsets[b],
                        table.ids.begin() + table.offsets[b + 1]);
        }
    }
    std::sort(hits.begin(), hits.end());

    std::vector<ScoredCandidate> out;
    const double tables = static_cast<double>(idx.params_.tables);
    for (std::size_t a = 0; a < hits.size();) {
        std::size_t b = a;
        while (b < hits.size() && hits[b] == hits[a]) ++b;
        const auto count = static_cast<std::uint32_t>(b - a);
        out.push_back({hits[a], count, count / tables});
        a = b;
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        return x.collisions < y.collisions;
    });
    return out;
}

void save_index(const LshIndex& idx, const std::filesystem::path& path) {
    Writer w;
    w.raw(kMagic, sizeof(kMagic));
    w.u32(kFormatVersion);
    w.f64(idx.params_.delta);
    w.u32(idx.params_.k);
    w.u32(idx.params_.tables);
    w.u32(idx.params_.side);
    w.u32(static_cast<std::uint32_t>(idx.params_.dim));
    w.u64(idx.params_.seed);
    w.u64(idx.fingerprint_);
    w.u64(idx.n_);
    for (const auto& table : idx.tables_) {
        w.u64(table.keys.size());
        for (std::size_t b = 0; b < table.keys.size(); ++b) {
            w.u32(table.keys[b]);
            w.u32(table.offsets[b + 1] - table.offsets[b]);
            for (std::uint32_t e = table.offsets[b]; e < table.offsets[b + 1]; ++e) w.u32(table.ids[e]);
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexLoadError(IndexLoadError::Kind::Io, path.string() + ": cannot open for writing");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IndexLoadError(IndexLoadError::Kind::Io, path.string() + ": write failed");
}

LshIndex load_index(const std::filesystem::path& path, const Dataset& s) {
    using Kind = IndexLoadError::Kind;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IndexLoadError(Kind::Io, path.string() + ": cannot open index file");
    Reader r(std::string(std::istreambuf_iterator<char>(in), {}));

    if (r.remaining() < sizeof(kMagic) || r.raw(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
        throw IndexLoadError(Kind::BadMagic, path.string() + ": not an index file (bad magic)");
    if (const auto v = r.u32(); v != kFormatVersion)
        throw IndexLoadError(Kind::BadVersion,
                             path.string() + ": unsupported index version " + std::to_string(v));

    LshIndex idx;
    idx.params_.delta = r.f64();
    idx.params_.k = r.u32();
    idx.params_.tables = r.u32();
    idx.params_.side = r.u32();
    idx.params_.dim = r.u32();
    idx.params_.seed = r.u64();
    idx.fingerprint_ = r.u64();
    idx.n_ = r.u64();
    try {
        idx.params_.validate();
    } catch (const std::invalid_argument& e) {
        throw IndexLoadError(Kind::Corrupt, path.string() + ": invalid parameters: " + e.what());
    }
    if (idx.fingerprint_ != s.fingerprint() || idx.n_ != s.size() || idx.params_.dim != s.dim)
        throw IndexLoadError(Kind::FingerprintMismatch,
                             path.string() + ": index was built on a different dataset");

    idx.tables_.assign(idx.params_.tables, {});
    for (auto& table : idx.tables_) {
        const std::uint64_t buckets = r.u64();
        if (buckets > idx.n_) throw IndexLoadError(Kind::Corrupt, path.string() + ": bad bucket count");
        table.offsets.push_back(0);
        for (std::uint64_t b = 0; b < buckets; ++b) {
            const std::uint32_t key = r.u32();
            const std::uint32_t count = r.u32();
            if (count == 0 || (!table.keys.empty() && key <= table.keys.back()) ||
                table.ids.size() + count > idx.n_)
                throw IndexLoadError(Kind::Corrupt, path.string() + ": malformed bucket");
            table.keys.push_back(key);
            for (std::uint32_t e = 0; e < count; ++e) {
                const std::uint32_t id = r.u32();
                if (id >= idx.n_) throw IndexLoadError(Kind::Corrupt, path.string() + ": id out of range");
                table.ids.push_back(id);
            }
            table.offsets.push_back(static_cast<std::uint32_t>(table.ids.size()));
        }
        if (table.ids.size() != idx.n_)
            throw IndexLoadError(Kind::Corrupt, path.string() + ": table does not cover every curve");
    }
    if (r.remaining() != 0)
        throw IndexLoadError(Kind::Corrupt, path.string() + ": trailing bytes after index");
    idx.draw_hashes();
    return idx;
}

}  // namespace fresh
