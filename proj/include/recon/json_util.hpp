#pragma once

#include <json.hpp>

#include <fstream>
#include <string>

#include "recon/common.hpp"

namespace recon {

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    require(out.good(), "cannot write " + path);
    out << j.dump(1) << "\n";
}

inline nlohmann::json vec_to_json(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vec vec_from_json(const nlohmann::json& j) {
    auto a = j.get<std::vector<double>>();
    return Eigen::Map<const Vec>(a.data(), static_cast<Eigen::Index>(a.size()));
}

inline nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
    return rows;
}

inline Mat mat_from_json(const nlohmann::json& j) {
    const auto r = j.size();
    if (r == 0) return Mat(0, 0);
    Mat m(r, j[0].size());
    for (size_t i = 0; i < r; ++i) {
        auto row = j[i].get<std::vector<double>>();
        m.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Vec>(row.data(), static_cast<Eigen::Index>(row.size()));
    }
    return m;
}

}  // namespace recon
