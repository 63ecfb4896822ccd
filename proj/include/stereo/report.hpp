#pragma once

// Flat, insertion-ordered key/value documents for evaluation and timing
// results. Rendered either as `key=value` lines or as one JSON object.
//
// Field names:
//   evaluation  d1_all_est d1_all_all bad_0_5 bad_1 bad_2 bad_4 density
//               gt_pixels est_pixels est_errors all_pixels all_errors
//   timing      width height disparities time_total_s time_cost_s
//               time_aggregate_s time_post_s mde_per_s fps [fps_per_w]

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "stereo/metrics.hpp"
#include "stereo/pipeline.hpp"

namespace stereo {

enum class ReportFormat { text, json };

class Report {
public:
    using Value = std::variant<double, std::int64_t, std::string, std::vector<double>>;

    Report& add(std::string key, Value value) {
        fields_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    Report& add(std::string key, double value) { return add(std::move(key), Value{value}); }
    Report& add(std::string key, int value) { return add(std::move(key), Value{std::int64_t{value}}); }
    Report& add(std::string key, std::size_t value) {
        return add(std::move(key), Value{static_cast<std::int64_t>(value)});
    }
    Report& append(const Report& other) {
        fields_.insert(fields_.end(), other.fields_.begin(), other.fields_.end());
        return *this;
    }

    const std::vector<std::pair<std::string, Value>>& fields() const noexcept { return fields_; }

    const Value* find(const std::string& key) const {
        for (const auto& [k, v] : fields_)
            if (k == key) return &v;
        return nullptr;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json doc = nlohmann::ordered_json::object();
        for (const auto& [k, v] : fields_) std::visit([&](const auto& x) { doc[k] = x; }, v);
        return doc;
    }

    void write(std::ostream& out, ReportFormat format) const {
        if (format == ReportFormat::json) {
            out << to_json().dump(2) << '\n';
            return;
        }
        for (const auto& [k, v] : fields_) out << k << '=' << render(v) << '\n';
    }

    /// Shortest round-tripping decimal form.
    static std::string format_number(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::string s17 = buf;
        for (int precision = 6; precision < 17; ++precision) {
            std::snprintf(buf, sizeof buf, "%.*g", precision, v);
            if (std::strtod(buf, nullptr) == v) return buf;
        }
        return s17;
    }

private:
    static std::string render(const Value& v) {
        struct Visitor {
            std::string operator()(double x) const { return format_number(x); }
            std::string operator()(std::int64_t x) const { return std::to_string(x); }
            std::string operator()(const std::string& x) const { return x; }
            std::string operator()(const std::vector<double>& xs) const {
                std::string s;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (i) s += ',';
                    s += format_number(xs[i]);
                }
                return s;
            }
        };
        return std::visit(Visitor{}, v);
    }

    std::vector<std::pair<std::string, Value>> fields_;
};

inline Report to_report(const EvalReport& r) {
    Report doc;
    doc.add("d1_all_est", r.d1_all_est.value())
        .add("d1_all_all", r.d1_all_all.value())
        .add("bad_0_5", r.bad[0].value())
        .add("bad_1", r.bad[1].value())
        .add("bad_2", r.bad[2].value())
        .add("bad_4", r.bad[3].value())
        .add("density", r.density.value())
        .add("gt_pixels", r.gt_pixels)
        .add("est_pixels", r.d1_all_est.total)
        .add("est_errors", r.d1_all_est.count)
        .add("all_pixels", r.d1_all_all.total)
        .add("all_errors", r.d1_all_all.count);
    return doc;
}

inline Report to_report(const PipelineStats& s) {
    Report doc;
    doc.add("width", s.width)
        .add("height", s.height)
        .add("disparities", s.disparities)
        .add("time_total_s", s.time_total_s)
        .add("time_cost_s", s.time_cost_s)
        .add("time_aggregate_s", s.time_aggregate_s)
        .add("time_post_s", s.time_post_s)
        .add("mde_per_s", s.mde_per_s())
        .add("fps", s.fps());
    return doc;
}

} // namespace stereo
