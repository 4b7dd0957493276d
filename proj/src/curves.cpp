#include "fresh/curves.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fresh {

Curve::Curve(CurveId id, std::size_t dim, std::vector<double> coords)
    : id_(id), dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) throw std::invalid_argument("curve dimension must be at least 1");
    if (coords_.empty() || coords_.size() % dim_ != 0)
        throw std::invalid_argument("curve needs at least one complete vertex");
    for (double x : coords_)
        if (!std::isfinite(x)) throw std::invalid_argument("curve coordinate is not finite");
}

Curve Curve::from_values(std::vector<double> values, CurveId id) {
    return Curve(id, 1, std::move(values));
}

Curve Curve::from_points(const std::vector<Point>& points, CurveId id) {
    if (points.empty()) throw std::invalid_argument("curve needs at least one vertex");
    const std::size_t dim = points.front().size();
    std::vector<double> coords;
    coords.reserve(points.size() * dim);
    for (const auto& pt : points) {
        if (pt.size() != dim) throw std::invalid_argument("curve vertices differ in dimension");
        coords.insert(coords.end(), pt.begin(), pt.end());
    }
    return Curve(id, dim, std::move(coords));
}

void Dataset::renumber() {
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (curves[i].dim() != dim)
            throw std::invalid_argument("dataset curves differ in dimension");
        curves[i].set_id(static_cast<CurveId>(i));
    }
}

std::uint64_t Dataset::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    feed(dim);
    feed(curves.size());
    for (const auto& c : curves) {
        feed(c.size());
        for (double x : c.coords()) feed(std::bit_cast<std::uint64_t>(x));
    }
    return h;
}

double squared_distance(PointView a, PointView b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

double distance(PointView a, PointView b) { return std::sqrt(squared_distance(a, b)); }

BoundingBox bounding_box(const Curve& p) {
    BoundingBox box{Point(p.front().begin(), p.front().end()),
                    Point(p.front().begin(), p.front().end())};
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto v = p[i];
        for (std::size_t c = 0; c < v.size(); ++c) {
            box.lower[c] = std::min(box.lower[c], v[c]);
            box.upper[c] = std::max(box.upper[c], v[c]);
        }
    }
    return box;
}

double longest_edge(const Curve& p) {
    double best = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) best = std::max(best, distance(p[i - 1], p[i]));
    return best;
}

Curve simplify(const Curve& p, double mu) {
    if (!(mu >= 0.0)) throw std::invalid_argument("simplification parameter must be >= 0");
    const std::size_t n = p.size();
    std::vector<double> out(p.front().begin(), p.front().end());
    std::size_t current = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (distance(p[i], p[current]) > mu) {
            out.insert(out.end(), p[i].begin(), p[i].end());
            current = i;
        }
    }
    if (current != n - 1) out.insert(out.end(), p.back().begin(), p.back().end());
    return Curve(p.id(), p.dim(), std::move(out));
}

Curve densify(const Curve& p, double max_edge) {
    if (!(max_edge > 0.0)) throw std::invalid_argument("densify edge length must be > 0");
    const std::size_t dim = p.dim();
    std::vector<double> out(p.front().begin(), p.front().end());
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto a = p[i - 1];
        const auto b = p[i];
        const double len = distance(a, b);
        auto pieces = static_cast<std::size_t>(std::ceil(len / max_edge));
        if (pieces > 0 && len / static_cast<double>(pieces) > max_edge) ++pieces;
        for (std::size_t s = 1; s < pieces; ++s) {
            const double t = static_cast<double>(s) / static_cast<double>(pieces);
            for (std::size_t c = 0; c < dim; ++c) out.push_back(a[c] + (b[c] - a[c]) * t);
        }
        out.insert(out.end(), b.begin(), b.end());
    }
    return Curve(p.id(), dim, std::move(out));
}

Dataset densify(const Dataset& s, double max_edge) {
    Dataset out{s.dim, {}};
    out.curves.reserve(s.size());
    for (const auto& c : s.curves) out.curves.push_back(densify(c, max_edge));
    return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_separator(char ch) {
    return ch == ',' || ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '\v' ||
           ch == '\f';
}

struct Field {
    std::string_view text;
    std::size_t column;  // 1-based character column
};

std::vector<Field> split_fields(std::string_view line) {
    std::vector<Field> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_separator(line[i])) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !is_separator(line[i])) ++i;
        fields.push_back({line.substr(start, i - start), start + 1});
    }
    return fields;
}

std::string location(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

double parse_number(const Field& f, const std::string& source, std::size_t line_no) {
    double value = 0.0;
    const char* first = f.text.data();
    const char* last = first + f.text.size();
    if (!f.text.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw ParseError(location(source, line_no) + ":" + std::to_string(f.column) +
                         ": not a number: '" + std::string(f.text) + "'");
    if (!std::isfinite(value))
        throw ParseError(location(source, line_no) + ":" + std::to_string(f.column) +
                         ": non-finite value '" + std::string(f.text) + "'");
    return value;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char ch) { return is_separator(ch); });
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        fn(std::string_view(text).substr(pos, end - pos), line_no);
        if (end == text.size()) break;
        pos = end + 1;
    }
}

std::string shortest(double x) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    (void)ec;
    return std::string(buf.data(), ptr);
}

}  // namespace

Dataset parse_series_1d_text(const std::string& text, bool skip_first_field,
                             const std::string& source) {
    Dataset out{1, {}};
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (is_blank(line)) return;
        auto fields = split_fields(line);
        std::size_t first = skip_first_field ? 1 : 0;
        if (fields.size() <= first)
            throw ParseError(location(source, line_no) + ": empty curve");
        std::vector<double> values;
        values.reserve(fields.size() - first);
        for (std::size_t i = first; i < fields.size(); ++i)
            values.push_back(parse_number(fields[i], source, line_no));
        out.curves.push_back(
            Curve::from_values(std::move(values), static_cast<CurveId>(out.curves.size())));
    });
    return out;
}

Dataset parse_series_1d(const std::filesystem::path& path, bool skip_first_field) {
    return parse_series_1d_text(read_file(path), skip_first_field, path.string());
}

Curve parse_curve_file(const std::filesystem::path& path, std::size_t expected_dim) {
    const std::string text = read_file(path);
    std::vector<double> coords;
    std::size_t dim = expected_dim;
    for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        std::size_t lead = 0;
        while (lead < line.size() && is_separator(line[lead])) ++lead;
        if (lead < line.size() && line[lead] == '#') return;
        if (is_blank(line)) return;
        auto fields = split_fields(line);
        if (dim == 0) dim = fields.size();
        if (fields.size() != dim)
            throw ParseError(location(path.string(), line_no) + ": expected " +
                             std::to_string(dim) + " coordinates, found " +
                             std::to_string(fields.size()));
        for (const auto& f : fields) coords.push_back(parse_number(f, path.string(), line_no));
    });
    if (coords.empty()) throw ParseError(path.string() + ": empty trajectory");
    return Curve(0, dim, std::move(coords));
}

Dataset parse_trajectories_2d(const std::filesystem::path& list_path) {
    const std::string text = read_file(list_path);
    const auto base = list_path.parent_path();
    Dataset out{2, {}};
    for_each_line(text, [&](std::string_view line, std::size_t) {
        auto fields = split_fields(line);
        if (fields.empty() || fields.front().text.front() == '#') return;
        std::filesystem::path entry{std::string(line.substr(
            fields.front().column - 1,
            fields.back().column - fields.front().column + fields.back().text.size()))};
        if (entry.is_relative()) entry = base / entry;
        Curve c = parse_curve_file(entry, 2);
        c.set_id(static_cast<CurveId>(out.curves.size()));
        out.curves.push_back(std::move(c));
    });
    return out;
}

std::string format_series_1d(const Dataset& s) {
    std::string out;
    for (const auto& c : s.curves) {
        for (std::size_t i = 0; i < c.coords().size(); ++i) {
            if (i > 0) out += ',';
            out += shortest(c.coords()[i]);
        }
        out += '\n';
    }
    return out;
}

void write_series_1d(const Dataset& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path.string() + ": cannot open for writing");
    out << format_series_1d(s);
}

std::string format_curve(const Curve& c) {
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto v = c[i];
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k > 0) out += ' ';
            out += shortest(v[k]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace fresh
