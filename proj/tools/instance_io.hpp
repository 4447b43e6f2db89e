#pragma once

#include <nucnorm/core.hpp>

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

namespace nucnorm::io {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string &s) {
    double x = 0;
    const char *first = s.data(), *last = s.data() + s.size();
    if (first != last && *first == '+')
        ++first;
    auto res = std::from_chars(first, last, x);
    if (res.ec != std::errc() || res.ptr != last)
        throw FormatError("not a number: '" + s + "'");
    if (!std::isfinite(x))
        throw FormatError("non-finite entry: '" + s + "'");
    return x;
}

inline json matrix_to_json(const Matrix &A) {
    json data = json::array();
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            data.push_back(format_double(A(i, j)));
    return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const json &j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
        !j.contains("data"))
        throw FormatError("matrix needs rows, cols and data");
    Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
    const json &d = j.at("data");
    if (r < 1 || c < 1)
        throw FormatError("matrix dimensions must be positive");
    if (!d.is_array() || static_cast<Index>(d.size()) != r * c)
        throw FormatError("matrix payload length does not match rows * cols");
    Matrix A(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index k = 0; k < c; ++k) {
            const json &e = d[static_cast<size_t>(i * c + k)];
            if (e.is_string())
                A(i, k) = parse_double(e.get<std::string>());
            else if (e.is_number())
                A(i, k) = e.get<double>();
            else
                throw FormatError("matrix entries must be strings or numbers");
        }
    return A;
}

inline const std::set<std::string> &known_roles() {
    static const std::set<std::string> roles{"X", "Y", "Z", "G", "H", "Xstar",
                                             "Ystar", "S", "W", "P", "D"};
    return roles;
}

struct Instance {
    std::string kind;
    Index rows = 0;
    Index cols = 0;
    std::map<std::string, Matrix> matrices;
    std::optional<std::uint64_t> seed;
    std::map<std::string, double> tolerances;

    bool has(const std::string &role) const { return matrices.count(role) > 0; }

    const Matrix &at(const std::string &role) const {
        auto it = matrices.find(role);
        if (it == matrices.end())
            throw FormatError("instance has no matrix '" + role + "'");
        return it->second;
    }

    void set(const std::string &role, const Matrix &A) {
        if (matrices.empty() && rows == 0) {
            rows = A.rows();
            cols = A.cols();
        }
        matrices[role] = A;
    }
};

inline json instance_to_json(const Instance &inst) {
    json j;
    j["schema"] = 1;
    j["kind"] = inst.kind;
    j["rows"] = inst.rows;
    j["cols"] = inst.cols;
    json mats = json::object();
    for (const auto &[role, A] : inst.matrices)
        mats[role] = matrix_to_json(A);
    j["matrices"] = mats;
    if (inst.seed)
        j["seed"] = *inst.seed;
    if (!inst.tolerances.empty()) {
        json t = json::object();
        for (const auto &[k, v] : inst.tolerances)
            t[k] = format_double(v);
        j["tolerances"] = t;
    }
    return j;
}

inline Instance instance_from_json(const json &j) {
    if (!j.is_object())
        throw FormatError("instance must be a JSON object");
    if (j.contains("schema") && j.at("schema") != 1)
        throw FormatError("unsupported schema version");
    Instance inst;
    inst.kind = j.value("kind", std::string{});
    if (!j.contains("matrices") || !j.at("matrices").is_object())
        throw FormatError("instance needs a 'matrices' object");
    for (const auto &[role, mj] : j.at("matrices").items()) {
        if (!known_roles().count(role))
            throw FormatError("unknown matrix role '" + role + "'");
        inst.matrices[role] = matrix_from_json(mj);
    }
    if (j.contains("rows") && j.contains("cols")) {
        inst.rows = j.at("rows").get<Index>();
        inst.cols = j.at("cols").get<Index>();
    } else if (!inst.matrices.empty()) {
        inst.rows = inst.matrices.begin()->second.rows();
        inst.cols = inst.matrices.begin()->second.cols();
    }
    for (const auto &[role, A] : inst.matrices)
        if (A.rows() != inst.rows || A.cols() != inst.cols)
            throw FormatError("matrix '" + role +
                              "' does not match the declared dimensions");
    if (j.contains("seed"))
        inst.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tolerances"))
        for (const auto &[k, v] : j.at("tolerances").items())
            inst.tolerances[k] =
                v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>();
    return inst;
}

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

inline Instance read_instance(const std::string &path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception &e) {
        throw FormatError(path + ": " + e.what());
    }
    try {
        return instance_from_json(j);
    } catch (const json::exception &e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline void write_instance(const std::string &path, const Instance &inst) {
    write_file(path, instance_to_json(inst).dump(2) + "\n");
}

inline std::string matrix_to_csv(const Matrix &A) {
    std::string out;
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            if (j)
                out += ',';
            out += format_double(A(i, j));
        }
        out += '\n';
    }
    return out;
}

inline Matrix matrix_from_csv(const std::string &text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            auto b = cell.find_first_not_of(" \t");
            auto e = cell.find_last_not_of(" \t");
            if (b == std::string::npos)
                throw FormatError("empty CSV cell");
            row.push_back(parse_double(cell.substr(b, e - b + 1)));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged CSV rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw FormatError("empty CSV matrix");
    Matrix A(static_cast<Index>(rows.size()),
             static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            A(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return A;
}

/// FNV-1a over the dimensions and row-major IEEE bytes.
inline std::uint64_t digest(const Matrix &A) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void *p, size_t len) {
        const auto *c = static_cast<const unsigned char *>(p);
        for (size_t i = 0; i < len; ++i) {
            h ^= c[i];
            h *= 1099511628211ULL;
        }
    };
    std::int64_t dims[2] = {A.rows(), A.cols()};
    mix(dims, sizeof dims);
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j) {
            double v = A(i, j);
            mix(&v, sizeof v);
        }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json verdict_to_json(const MembershipVerdict &v) {
    json j;
    j["state"] = to_string(v.state);
    j["member"] = v.member();
    json r = json::object(), t = json::object();
    for (const auto &[k, x] : v.residuals)
        r[k] = std::isfinite(x) ? json(x) : json(nullptr);
    for (const auto &[k, x] : v.tolerances)
        t[k] = x;
    j["residuals"] = r;
    j["tolerances"] = t;
    j["notes"] = v.notes;
    if (v.certificate) {
        const auto &c = *v.certificate;
        j["certificate"] = {
            {"beta_plus", c.sub_partition.plus},
            {"beta_zero", c.sub_partition.zero},
            {"beta_minus", c.sub_partition.minus},
            {"Q", c.Q.size() ? matrix_to_json(c.Q) : json(nullptr)},
            {"xi1_free_block",
             c.xi.free_block.size() ? matrix_to_json(c.xi.free_block) : json(nullptr)},
            {"residual_beta", c.residual_beta}};
    }
    return j;
}

} // namespace nucnorm::io
