#include "vkrod/config.hpp"

#include <cstdio>
#include <fstream>

namespace vkrod {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ElasticityTensor material_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "isotropic")
        return isotropic_tensor(j.at("lambda").get<double>(), j.at("mu").get<double>());
    if (kind == "matrix6") {
        const auto& rows = j.at("rows");
        if (rows.size() != 6)
            throw std::invalid_argument("material: matrix6 needs 6 rows");
        Matrix6 m;
        for (int r = 0; r < 6; ++r) {
            if (rows[r].size() != 6)
                throw std::invalid_argument("material: matrix6 rows need 6 entries");
            for (int c = 0; c < 6; ++c) m(r, c) = rows[r][c].get<double>();
        }
        ElasticityTensor t(m);
        admissibility_bounds(t); // rejects non-coercive input
        return t;
    }
    throw std::invalid_argument("material: unknown kind '" + kind + "'");
}

Json material_to_json(const ElasticityTensor& t) {
    Json j;
    j["kind"] = "matrix6";
    Json rows = Json::array();
    for (int r = 0; r < 6; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 6; ++c) row.push_back(t.matrix()(r, c));
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j;
}

MicrostructureSpec microstructure_from_json(const Json& j, std::uint64_t default_seed) {
    MicrostructureSpec spec;
    spec.seed = j.value("seed", default_seed);
    for (const auto& p : j.at("phases"))
        spec.phases.push_back(material_from_json(p));

    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "periodic") {
        spec.kind = MicrostructureKind::Periodic;
        if (j.contains("layout")) {
            for (const auto& cell : j.at("layout"))
                spec.layout.emplace_back(cell.at(0).get<int>(), cell.at(1).get<double>());
        } else {
            const auto& fr = j.at("fractions");
            for (size_t i = 0; i < fr.size(); ++i)
                spec.layout.emplace_back((int)i, fr[i].get<double>());
        }
    } else if (kind == "quasiperiodic") {
        spec.kind = MicrostructureKind::Quasiperiodic;
        spec.f1 = j.at("f1").get<double>();
        spec.f2 = j.at("f2").get<double>();
        spec.threshold = j.value("threshold", 0.0);
    } else if (kind == "renewal") {
        spec.kind = MicrostructureKind::Renewal;
        for (const auto& m : j.at("mean_lengths"))
            spec.mean_lengths.push_back(m.get<double>());
    } else {
        throw std::invalid_argument("microstructure: unknown kind '" + kind + "'");
    }
    return spec;
}

namespace {

LoadFunction load_function_from_json(const Json& j) {
    LoadFunction f;
    if (j.contains("poly"))
        for (const auto& c : j.at("poly")) f.poly.push_back(c.get<double>());
    else if (j.contains("table")) {
        for (const auto& c : j.at("table")) f.table.push_back(c.get<double>());
        if (f.table.size() < 2)
            throw std::invalid_argument("load: table needs at least 2 values");
    } else
        throw std::invalid_argument("load: function needs 'poly' or 'table'");
    return f;
}

RegimeSpec regime_from_json(const Json& j) {
    RegimeSpec r;
    const auto& g = j.at("gamma");
    if (g.is_string()) {
        const std::string s = g.get<std::string>();
        if (s == "zero") r.regime = Regime::Zero;
        else if (s == "infinite") r.regime = Regime::Infinite;
        else throw std::invalid_argument("regime: gamma must be a number, 'zero' or 'infinite'");
    } else {
        r.regime = Regime::Finite;
        r.gamma = g.get<double>();
    }
    r.axial_nodes = j.value("axial_nodes", 8);
    r.window = j.value("window", 1.0);
    validate(r);
    return r;
}

} // namespace

Json effective_to_json(const EffectiveForm& eff) {
    Json j;
    Json a0 = Json::array();
    for (int r = 0; r < 4; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 4; ++c) row.push_back(eff.a0(r, c));
        a0.push_back(row);
    }
    Json a01 = Json::array();
    for (int r = 0; r < 3; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 3; ++c) row.push_back(eff.a0_1(r, c));
        a01.push_back(row);
    }
    j["a0"] = a0;
    j["a0_1"] = a01;
    j["rho0"] = Json::array({eff.rho0_coeffs(0), eff.rho0_coeffs(1), eff.rho0_coeffs(2)});
    return j;
}

EffectiveForm effective_from_json(const Json& j) {
    if (j.contains("a0")) {
        Eigen::Matrix4d a0;
        const auto& rows = j.at("a0");
        if (rows.size() != 4)
            throw std::invalid_argument("effective: a0 needs 4 rows");
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a0(r, c) = rows[r][c].get<double>();
        return effective_form_from_a0(a0);
    }
    if (j.contains("a0_1")) {
        // Rebuild a0 from the reduced data: a = a_rho, b = -a rho0,
        // C = a0_1 + a rho0 rho0^T inverts the Schur complement.
        Eigen::Matrix3d a01;
        const auto& rows = j.at("a0_1");
        if (rows.size() != 3)
            throw std::invalid_argument("effective: a0_1 needs 3 rows");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a01(r, c) = rows[r][c].get<double>();
        Eigen::Vector3d rho0 = Eigen::Vector3d::Zero();
        if (j.contains("rho0"))
            for (int c = 0; c < 3; ++c) rho0(c) = j.at("rho0")[c].get<double>();
        const double a = j.value("a_rho", 1.0);
        Eigen::Matrix4d a0;
        a0(0, 0) = a;
        a0.block<3, 1>(1, 0) = -a * rho0;
        a0.block<1, 3>(0, 1) = (-a * rho0).transpose();
        a0.block<3, 3>(1, 1) = a01 + a * rho0 * rho0.transpose();
        return effective_form_from_a0(a0);
    }
    throw std::invalid_argument("effective: need 'a0' or 'a0_1'");
}

EffectiveTable effective_table_from_json(const Json& j) {
    if (j.contains("table")) {
        EffectiveTable t;
        for (const auto& entry : j.at("table"))
            t.forms.push_back(effective_from_json(entry));
        if (t.forms.empty())
            throw std::invalid_argument("effective: empty table");
        return t;
    }
    return EffectiveTable(effective_from_json(j));
}

CrossSection build_section_from_config(const RunConfig::Section& s) {
    CrossSection raw;
    switch (s.shape) {
    case SectionShape::Disk: raw = build_disk_section(s.radius, s.mesh_h); break;
    case SectionShape::Rectangle: raw = build_rectangle_section(s.width, s.height, s.mesh_h); break;
    case SectionShape::Polygon: raw = build_polygon_section(s.polygon, s.mesh_h); break;
    }
    return normalize_section(raw);
}

RunConfig parse_config(const Json& j) {
    RunConfig cfg;
    cfg.seed = j.value("seed", 0ULL);
    cfg.threads = j.value("threads", 4);
    if (cfg.threads < 1)
        throw std::invalid_argument("config: threads must be >= 1");

    if (j.contains("microstructure"))
        cfg.micro = microstructure_from_json(j.at("microstructure"), cfg.seed);

    if (j.contains("section")) {
        const auto& s = j.at("section");
        RunConfig::Section sec;
        const std::string shape = s.at("shape").get<std::string>();
        if (shape == "disk") {
            sec.shape = SectionShape::Disk;
            sec.radius = s.value("radius", 1.0);
        } else if (shape == "rect" || shape == "rectangle") {
            sec.shape = SectionShape::Rectangle;
            sec.width = s.value("width", 1.0);
            sec.height = s.value("height", 1.0);
        } else if (shape == "polygon") {
            sec.shape = SectionShape::Polygon;
            for (const auto& v : s.at("vertices"))
                sec.polygon.emplace_back(v[0].get<double>(), v[1].get<double>());
        } else {
            throw std::invalid_argument("section: unknown shape '" + shape + "'");
        }
        sec.mesh_h = s.at("mesh_h").get<double>();
        if (!(sec.mesh_h > 0.0))
            throw std::invalid_argument("section: mesh_h must be positive");
        cfg.section = sec;
    }

    if (j.contains("regime"))
        cfg.regime = regime_from_json(j.at("regime"));

    if (j.contains("load")) {
        const auto& l = j.at("load");
        cfg.load.L = l.value("L", 1.0);
        if (!(cfg.load.L > 0.0))
            throw std::invalid_argument("load: L must be positive");
        if (l.contains("f2")) cfg.load.f2 = load_function_from_json(l.at("f2"));
        if (l.contains("f3")) cfg.load.f3 = load_function_from_json(l.at("f3"));
        cfg.rod_nodes = l.value("n_nodes", 1001);
        if (cfg.rod_nodes < 3)
            throw std::invalid_argument("load: n_nodes must be >= 3");
    }

    if (j.contains("bc")) {
        const std::string bc = j.at("bc").get<std::string>();
        if (bc == "clamped_left") cfg.bc = BcVariant::ClampedLeft;
        else if (bc == "paper_literal") cfg.bc = BcVariant::PaperLiteral;
        else throw std::invalid_argument("bc: must be 'clamped_left' or 'paper_literal'");
    }

    if (j.contains("macro")) {
        const auto& m = j.at("macro");
        cfg.macro.rho = m.value("rho", 0.0);
        if (m.contains("kappa"))
            for (int c = 0; c < 3; ++c) cfg.macro.kappa(c) = m.at("kappa")[c].get<double>();
        cfg.macro_L = m.value("L", 1.0);
        if (!(cfg.macro_L > 0.0))
            throw std::invalid_argument("macro: L must be positive");
    }

    if (j.contains("h_list")) {
        for (const auto& h : j.at("h_list")) cfg.h_list.push_back(h.get<double>());
        for (size_t i = 0; i + 1 < cfg.h_list.size(); ++i)
            if (!(cfg.h_list[i + 1] < cfg.h_list[i]))
                throw std::invalid_argument("h_list: must be strictly decreasing");
    }

    if (j.contains("effective")) {
        const auto& e = j.at("effective");
        if (e.contains("file"))
            cfg.effective_file = e.at("file").get<std::string>();
        else
            cfg.effective_inline = effective_table_from_json(e);
    }

    if (j.contains("birkhoff")) {
        const auto& b = j.at("birkhoff");
        for (const auto& g : b.at("g")) cfg.birkhoff_g.push_back(g.get<double>());
        for (const auto& t : b.at("windows")) cfg.birkhoff_windows.push_back(t.get<double>());
    }

    if (j.contains("output")) {
        const auto& o = j.at("output");
        cfg.out_csv = o.value("csv", "");
        cfg.out_json = o.value("json", "");
        cfg.out_mesh_json = o.value("mesh_json", "");
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot read config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("config field error: ") + e.what());
    }
}

} // namespace vkrod
