#include "nsvar/report.hpp"

namespace nsvar {

json json_num(double x) {
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    return x;
}

json Report::to_json() const {
    json j;
    j["kind"] = kind;
    j["lhs"] = json_num(lhs);
    j["rhs"] = json_num(rhs);
    j["residual"] = json_num(residual);
    j["tolerance"] = json_num(tolerance);
    j["pass"] = pass;
    j["witnesses"] = witnesses;
    j["notes"] = notes;
    return j;
}

json grid_to_json(const TimeGrid& g) {
    json j;
    j["a"] = g.a();
    j["b"] = g.b();
    j["nodes"] = g.nodes();
    return j;
}

json curve_to_json(const Curve& c) {
    json j = grid_to_json(c.grid);
    j["values"] = c.values;
    j["interp"] = c.interp == Interp::PiecewiseLinear ? "linear" : "rc-constant";
    return j;
}

Curve curve_from_json(const json& j) {
    for (const auto& key : {"a", "b", "nodes", "values", "interp"})
        if (!j.contains(key)) throw structural_error(std::string("curve: missing field \"") + key + "\"");
    TimeGrid g(j.at("a").get<double>(), j.at("b").get<double>(),
               j.at("nodes").get<std::vector<double>>());
    std::vector<Vec> values;
    for (const auto& v : j.at("values")) values.push_back(v.get<Vec>());
    const std::string interp = j.at("interp").get<std::string>();
    if (interp != "linear" && interp != "rc-constant")
        throw structural_error("curve: interp must be \"linear\" or \"rc-constant\"");
    return Curve(std::move(g), std::move(values),
                 interp == "linear" ? Interp::PiecewiseLinear : Interp::RightConstant);
}

json step_to_json(const StepFunction& s) {
    json j = grid_to_json(s.grid);
    j["cell_values"] = s.cell_values;
    return j;
}

}  // namespace nsvar
