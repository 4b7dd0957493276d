#ifndef FRESH_CURVES_HPP
#define FRESH_CURVES_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fresh {

/// Raised for unreadable or malformed input files. The message names the
/// offending file, line and (when known) column.
class ParseError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

using CurveId = std::uint32_t;

/// Owned d-dimensional point.
using Point = std::vector<double>;

/// Read-only view of one vertex.
using PointView = std::span<const double>;

/// A polygonal curve: vertices in traversal order, stored flat
/// (vertex i occupies coords[i*dim, (i+1)*dim)).
class Curve {
   public:
    Curve() = default;
    Curve(CurveId id, std::size_t dim, std::vector<double> coords);

    /// Convenience for 1-D curves.
    static Curve from_values(std::vector<double> values, CurveId id = 0);
    /// Builds a curve from a list of points, all of the same dimension.
    static Curve from_points(const std::vector<Point>& points, CurveId id = 0);

    CurveId id() const { return id_; }
    void set_id(CurveId id) { id_ = id; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
    bool empty() const { return coords_.empty(); }

    PointView operator[](std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    PointView front() const { return (*this)[0]; }
    PointView back() const { return (*this)[size() - 1]; }

    const std::vector<double>& coords() const { return coords_; }

    friend bool operator==(const Curve& a, const Curve& b) {
        return a.dim_ == b.dim_ && a.coords_ == b.coords_;
    }

   private:
    CurveId id_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

/// Curves sharing one dimension, with ids dense in [0, n).
struct Dataset {
    std::size_t dim = 0;
    std::vector<Curve> curves;

    std::size_t size() const { return curves.size(); }
    bool empty() const { return curves.empty(); }
    const Curve& operator[](std::size_t i) const { return curves[i]; }

    /// Reassigns ids to positions and checks the dimension invariant.
    void renumber();

    /// 64-bit FNV-1a checksum over dimension, lengths and coordinate bits.
    std::uint64_t fingerprint() const;
};

struct BoundingBox {
    Point lower;
    Point upper;
};

double squared_distance(PointView a, PointView b);
double distance(PointView a, PointView b);

BoundingBox bounding_box(const Curve& p);

/// Length of the longest edge; 0 for a single vertex.
double longest_edge(const Curve& p);

/// Greedy mu-simplification: keeps the first vertex, then every vertex
/// farther than mu from the last kept one, then the last vertex.
Curve simplify(const Curve& p, double mu);

/// Subdivides every edge longer than max_edge into the fewest equal pieces
/// no longer than max_edge. The traced polyline is unchanged.
Curve densify(const Curve& p, double max_edge);

Dataset densify(const Dataset& s, double max_edge);

// ---------------------------------------------------------------------------
// File formats

/// One curve per line, fields separated by commas and/or whitespace. With
/// skip_first_field the leading class label of each line is dropped.
/// Blank lines are ignored.
Dataset parse_series_1d(const std::filesystem::path& path, bool skip_first_field);

/// Same as parse_series_1d but reading from an in-memory buffer; `source`
/// is used in error messages.
Dataset parse_series_1d_text(const std::string& text, bool skip_first_field,
                             const std::string& source = "<memory>");

/// listPath holds one trajectory file path per line (relative paths are
/// resolved against the list's directory). Each trajectory file holds one
/// "x y" pair per line; '#' lines are comments.
Dataset parse_trajectories_2d(const std::filesystem::path& list_path);

/// Reads one curve file with one vertex per line. The dimension is taken from
/// the first vertex line; `expected_dim` of 0 accepts any dimension.
Curve parse_curve_file(const std::filesystem::path& path, std::size_t expected_dim = 0);

/// Writes the dataset in the 1-D series format (no label field), with the
/// shortest decimal representation that round-trips each value.
std::string format_series_1d(const Dataset& s);
void write_series_1d(const Dataset& s, const std::filesystem::path& path);

/// Writes one curve per line-oriented file ("x y" per line).
std::string format_curve(const Curve& c);

}  // namespace fresh

#endif
