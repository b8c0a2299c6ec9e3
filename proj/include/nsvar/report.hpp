#ifndef NSVAR_REPORT_HPP
#define NSVAR_REPORT_HPP

#include <json.hpp>

#include <string>

#include "nsvar/common.hpp"
#include "nsvar/grid.hpp"

namespace nsvar {

using json = nlohmann::ordered_json;

// Structured outcome of a verification. The residual convention is per
// kind, but always such that pass == (residual <= tolerance).
struct Report {
    std::string kind;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    json witnesses = json::object();
    std::string notes;

    Report& finalize() {
        pass = residual <= tolerance;
        return *this;
    }
    json to_json() const;
};

// JSON encodings; +-inf becomes the strings "inf"/"-inf" (JSON has no
// infinities and silently degrading to null would lose the sign).
json json_num(double x);
json curve_to_json(const Curve& c);
Curve curve_from_json(const json& j);
json step_to_json(const StepFunction& s);
json grid_to_json(const TimeGrid& g);

}  // namespace nsvar

#endif
