#include "ptcalc/geometry_file.hpp"

#include "ptcalc/errors.hpp"

#include <fstream>
#include <sstream>

namespace ptcalc {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key, const std::string& where) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError(std::string("missing field \"") + key + "\"", where);
    return *it;
}

Mat<Expr> parse_expr_matrix(const json& arr, int n, std::span<const std::string> vars,
                            const std::string& where, bool require_symmetric) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
        throw SchemaError("expected an array of " + std::to_string(n) + " rows", where);
    Mat<Expr> out(n, Expr::number(0.0));
    for (int i = 0; i < n; ++i) {
        const json& row = arr[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n)
            throw SchemaError("expected a row of " + std::to_string(n) + " entries",
                              where + "/" + std::to_string(i));
        for (int j = 0; j < n; ++j) {
            const json& cell = row[static_cast<std::size_t>(j)];
            std::string cellpath = where + "/" + std::to_string(i) + "/" + std::to_string(j);
            std::string text;
            if (cell.is_string()) text = cell.get<std::string>();
            else if (cell.is_number()) text = cell.dump();
            else throw SchemaError("expected an expression string or number", cellpath);
            try {
                out(i, j) = parse_expression(text, vars);
            } catch (const ParseError& e) {
                throw SchemaError(std::string("bad expression: ") + e.what(), cellpath);
            }
        }
    }
    if (require_symmetric) {
        // symmetry must hold textually or by equal parse results on zero input;
        // we enforce the cheap structural requirement g_ij text == g_ji text
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (to_string(out(i, j)) != to_string(out(j, i)))
                    throw SchemaError("matrix must be symmetric (entries (" + std::to_string(i) +
                                          "," + std::to_string(j) + ") and (" + std::to_string(j) +
                                          "," + std::to_string(i) + ") differ)",
                                      where);
            }
    }
    return out;
}

} // namespace

ChartGeometry parse_geometry_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("expected a JSON object", "/");
    ChartGeometry g;
    g.name = require(doc, "name", "/").get<std::string>();
    g.n = require(doc, "dimension", "/").get<int>();
    if (g.n < 2 || g.n > 6) throw SchemaError("dimension must be between 2 and 6", "/dimension");

    const json& vars = require(doc, "variables", "/");
    if (!vars.is_array() || static_cast<int>(vars.size()) != g.n)
        throw SchemaError("variables must list exactly dimension names", "/variables");
    for (const auto& v : vars) g.variables.push_back(v.get<std::string>());

    const json& dom = require(doc, "domain", "/");
    if (!dom.is_array() || static_cast<int>(dom.size()) != g.n)
        throw SchemaError("domain must list one [lo, hi] interval per variable", "/domain");
    for (int i = 0; i < g.n; ++i) {
        const json& iv = dom[static_cast<std::size_t>(i)];
        if (!iv.is_array() || iv.size() != 2)
            throw SchemaError("expected [lo, hi]", "/domain/" + std::to_string(i));
        double lo = iv[0].get<double>(), hi = iv[1].get<double>();
        if (!(lo < hi))
            throw SchemaError("interval must satisfy lo < hi", "/domain/" + std::to_string(i));
        g.domain.push_back({lo, hi});
    }

    bool has_metric = doc.contains("metric");
    bool has_conn = doc.contains("connection");
    if (has_metric == has_conn)
        throw SchemaError("exactly one of \"metric\" or \"connection\" is required", "/");

    if (has_metric) {
        g.has_metric = true;
        g.metric = parse_expr_matrix(doc["metric"], g.n, g.variables, "/metric", true);
    } else {
        const json& conn = doc["connection"];
        const json& gj = require(conn, "Gamma", "/connection");
        if (!gj.is_array() || static_cast<int>(gj.size()) != g.n)
            throw SchemaError("Gamma must have dimension outer entries (index c of Gamma^c_ab)",
                              "/connection/Gamma");
        g.gamma = Ten3<Expr>(g.n, Expr::number(0.0));
        for (int c = 0; c < g.n; ++c) {
            Mat<Expr> slice = parse_expr_matrix(gj[static_cast<std::size_t>(c)], g.n, g.variables,
                                                "/connection/Gamma/" + std::to_string(c), true);
            for (int a = 0; a < g.n; ++a)
                for (int b = 0; b < g.n; ++b) g.gamma(c, a, b) = slice(a, b);
        }
    }

    if (doc.contains("sigma")) {
        g.has_sigma = true;
        g.sigma = parse_expr_matrix(doc["sigma"], g.n, g.variables, "/sigma", true);
    }
    if (doc.contains("samples")) {
        g.samples = doc["samples"].get<int>();
        if (g.samples < 1) throw SchemaError("samples must be positive", "/samples");
    }
    if (doc.contains("seed")) g.seed = doc["seed"].get<unsigned>();
    return g;
}

ChartGeometry load_geometry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open geometry file", path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what(), path);
    }
    return parse_geometry_json(doc);
}

} // namespace ptcalc
