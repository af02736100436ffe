/**
 * @file io.hpp
 * @brief Reading and writing clouds, IFS definitions, knot data and
 *        sampled functions.
 *
 * Formats:
 *   - point cloud CSV: header `# dim=<d> resolution=<eps>`, one point per row
 *   - product set: JSON manifest `{"factors": ["a.csv", "b.csv"]}`, paths
 *     relative to the manifest
 *   - IFS JSON: `dimension`, `label`, `maps: [{linear, offset, lipschitz}]`,
 *     optional `condensation`, or `factors: [<ifs>, ...]` for products
 *   - knot CSV: rows `x,y`
 *   - sampled function CSV: header `x,g`, one sample per row
 */
#pragma once

#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fractal/affine_map.hpp"
#include "fractal/dimension.hpp"
#include "fractal/errors.hpp"
#include "fractal/fif.hpp"
#include "fractal/ifs.hpp"
#include "fractal/inhomogeneous.hpp"
#include "fractal/point_cloud.hpp"

namespace fractal {

/// A file could not be read, written or parsed.
class IoError : public Error {
public:
    using Error::Error;
};

namespace io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

inline std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline std::vector<double> split_numbers(const std::string& line, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw IoError("non-numeric field '" + cell + "' in " + where);
        }
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw IoError("trailing characters in field '" + cell + "' in " + where);
        out.push_back(v);
    }
    return out;
}

inline void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
    out << std::setprecision(17);
    out << "# dim=" << cloud.dimension() << " resolution=" << cloud.resolution() << "\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        auto p = cloud.point(i);
        for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << p[j];
        out << "\n";
    }
}

inline void write_cloud_csv(const fs::path& path, const PointCloud& cloud) {
    auto out = open_out(path);
    write_cloud_csv(out, cloud);
}

/// Without a header the dimension comes from the first row and the
/// resolution is 0.
inline PointCloud read_cloud_csv(std::istream& in, const std::string& where = "cloud") {
    std::size_t dim = 0;
    double resolution = 0.0;
    std::vector<double> flat;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("dim=", 0) == 0) dim = static_cast<std::size_t>(std::stoul(tok.substr(4)));
                else if (tok.rfind("resolution=", 0) == 0) resolution = std::stod(tok.substr(11));
            }
            continue;
        }
        const auto v = split_numbers(line, where + " row " + std::to_string(row));
        if (dim == 0) dim = v.size();
        if (v.size() != dim)
            throw IoError(where + " row " + std::to_string(row) + " has " + std::to_string(v.size()) +
                          " columns, expected " + std::to_string(dim));
        flat.insert(flat.end(), v.begin(), v.end());
    }
    if (flat.empty()) throw IoError(where + " contains no points");
    return PointCloud(dim, std::move(flat), resolution);
}

inline PointCloud read_cloud_csv(const fs::path& path) {
    auto in = open_in(path);
    return read_cloud_csv(in, path.string());
}

/// Writes `<stem>.<k>.csv` next to the manifest.
inline void write_product_set(const fs::path& manifest, const ProductSet& set) {
    json doc;
    doc["factors"] = json::array();
    for (std::size_t k = 0; k < set.factor_count(); ++k) {
        const std::string name = manifest.stem().string() + "." + std::to_string(k) + ".csv";
        write_cloud_csv(manifest.parent_path() / name, set.factor(k));
        doc["factors"].push_back(name);
    }
    auto out = open_out(manifest);
    out << doc.dump(2) << "\n";
}

inline json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

inline ProductSet read_product_set(const fs::path& manifest) {
    const json doc = read_json(manifest);
    if (!doc.contains("factors") || !doc["factors"].is_array())
        throw IoError(manifest.string() + " lacks a 'factors' array");
    std::vector<PointCloud> factors;
    for (const auto& f : doc["factors"]) factors.push_back(read_cloud_csv(manifest.parent_path() / f.get<std::string>()));
    return ProductSet(std::move(factors));
}

struct IfsDocument {
    std::size_t dimension = 0;
    std::string label;
    std::vector<AffineMap> maps;
    std::optional<PointCloud> condensation;
    std::vector<IfsDocument> factors;

    bool is_product() const { return !factors.empty(); }

    IfsSystem system() const {
        if (maps.empty()) throw StructuralError("IFS '" + label + "' has no maps");
        return IfsSystem(maps, label);
    }

    CondensedIfs condensed() const {
        if (!condensation) throw StructuralError("IFS '" + label + "' has no condensation set");
        return CondensedIfs(maps, *condensation, label);
    }

    ProductIfs product() const {
        std::vector<IfsSystem> fs;
        for (const auto& f : factors) fs.push_back(f.system());
        return ProductIfs(std::move(fs));
    }

    CondensedProductIfs condensed_product() const {
        std::vector<CondensedIfs> fs;
        for (const auto& f : factors) fs.push_back(f.condensed());
        return CondensedProductIfs(std::move(fs));
    }
};

template <class T>
T json_get(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw IoError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(where + ": field '" + key + "': " + e.what());
    }
}

inline AffineMap parse_map(const json& j, std::size_t dim, const std::string& where) {
    const auto offset = json_get<std::vector<double>>(j, "offset", where);
    if (dim != 0 && offset.size() != dim) throw IoError(where + ": offset length does not match the dimension");
    const std::size_t d = offset.size();
    std::vector<double> linear;
    if (!j.contains("linear")) throw IoError(where + ": missing field 'linear'");
    const json& lin = j["linear"];
    if (lin.is_number()) {
        linear.assign(d * d, 0.0);
        for (std::size_t r = 0; r < d; ++r) linear[r * d + r] = lin.get<double>();
    } else {
        const auto rows = json_get<std::vector<std::vector<double>>>(j, "linear", where);
        if (rows.size() != d) throw IoError(where + ": linear part must have " + std::to_string(d) + " rows");
        for (const auto& row : rows) {
            if (row.size() != d) throw IoError(where + ": linear part must be square");
            linear.insert(linear.end(), row.begin(), row.end());
        }
    }
    double lip = 0.0;
    if (j.contains("lipschitz")) {
        lip = json_get<double>(j, "lipschitz", where);
    } else {
        lip = operator_norm(linear, d);
    }
    return AffineMap(std::move(linear), offset, lip);
}

inline PointCloud parse_condensation(const json& j, const fs::path& base, const std::string& where) {
    if (j.contains("file")) return read_cloud_csv(base / json_get<std::string>(j, "file", where));
    if (j.contains("grid")) {
        const json& g = j["grid"];
        return PointCloud::grid(json_get<std::vector<double>>(g, "lo", where), json_get<std::vector<double>>(g, "hi", where),
                                json_get<double>(g, "spacing", where));
    }
    if (j.contains("points")) {
        const auto pts = json_get<std::vector<std::vector<double>>>(j, "points", where);
        const double eps = j.contains("resolution") ? json_get<double>(j, "resolution", where) : 0.0;
        return PointCloud::from_points(pts, eps);
    }
    throw IoError(where + ": condensation needs 'points', 'grid' or 'file'");
}

inline IfsDocument parse_ifs(const json& j, const fs::path& base, const std::string& where) {
    IfsDocument doc;
    if (!j.is_object()) throw IoError(where + ": IFS definition must be a JSON object");
    doc.label = j.contains("label") ? json_get<std::string>(j, "label", where) : std::string{};
    if (j.contains("factors")) {
        std::size_t k = 0;
        for (const auto& f : j["factors"]) {
            doc.factors.push_back(parse_ifs(f, base, where + ".factors[" + std::to_string(k) + "]"));
            doc.dimension += doc.factors.back().dimension;
            ++k;
        }
        if (doc.factors.empty()) throw IoError(where + ": 'factors' is empty");
        return doc;
    }
    doc.dimension = json_get<std::size_t>(j, "dimension", where);
    if (j.contains("maps")) {
        std::size_t i = 0;
        for (const auto& m : j["maps"]) doc.maps.push_back(parse_map(m, doc.dimension, where + ".maps[" + std::to_string(i++) + "]"));
    }
    if (j.contains("condensation")) {
        doc.condensation = parse_condensation(j["condensation"], base, where + ".condensation");
        if (doc.condensation->dimension() != doc.dimension)
            throw IoError(where + ": condensation dimension does not match");
    }
    return doc;
}

inline IfsDocument read_ifs(const fs::path& path) {
    return parse_ifs(read_json(path), path.parent_path(), path.string());
}

inline json ifs_to_json(const IfsSystem& sys) {
    json j;
    j["dimension"] = sys.dimension();
    j["label"] = sys.label();
    j["maps"] = json::array();
    for (const auto& m : sys.maps()) {
        json rows = json::array();
        for (std::size_t r = 0; r < m.dimension(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < m.dimension(); ++c) row.push_back(m.linear_at(r, c));
            rows.push_back(row);
        }
        j["maps"].push_back({{"linear", rows}, {"offset", m.offset()}, {"lipschitz", m.lipschitz()}});
    }
    return j;
}

/// Rows `x,y`; a non-numeric first row is taken as a header.
inline InterpolationData read_knots_csv(const fs::path& path) {
    auto in = open_in(path);
    std::vector<double> xs, ys;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (row == 1 && !std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-' && line[0] != '.' &&
            line[0] != '+')
            continue;
        const auto v = split_numbers(line, path.string() + " row " + std::to_string(row));
        if (v.size() != 2) throw IoError(path.string() + " row " + std::to_string(row) + " must have two columns");
        xs.push_back(v[0]);
        ys.push_back(v[1]);
    }
    return InterpolationData(std::move(xs), std::move(ys));
}

inline void write_sampled_csv(std::ostream& out, const SampledFunction& g) {
    out << std::setprecision(17) << "x,g\n";
    for (std::size_t i = 0; i <= g.grid(); ++i) out << g.x_at(i) << "," << g.value(i) << "\n";
}

inline void write_sampled_csv(const fs::path& path, const SampledFunction& g) {
    auto out = open_out(path);
    write_sampled_csv(out, g);
}

inline json estimate_to_json(const DimensionEstimate& est) {
    return {{"slope", est.slope}, {"intercept", est.intercept}, {"scales", est.scales}, {"counts", est.counts},
            {"r_squared", est.r_squared}};
}

}  // namespace io
}  // namespace fractal
