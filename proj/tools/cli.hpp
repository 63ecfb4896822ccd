#pragma once

// Command-line front end: estimate, evaluate, bench, dataset.
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "stereo/imgio.hpp"
#include "stereo/metrics.hpp"
#include "stereo/pipeline.hpp"
#include "stereo/png.hpp"
#include "stereo/report.hpp"

namespace stereo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Pipeline flags shared by estimate, bench and dataset.
struct PipelineFlags {
    std::string cost = "census9x7";
    int min_disp = 0;
    int max_disp = 127;
    int paths = 8;
    std::optional<std::uint32_t> p1;
    std::optional<std::uint32_t> p2;
    bool no_subpixel = false;
    std::string consistency = "approx";
    float lr_threshold = 1.0f;
    bool no_median = false;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    void attach(CLI::App& app) {
        app.add_option("--cost", cost, "Matching cost")
            ->check(CLI::IsMember({"census5x5", "census9x7", "ncc5x5", "ncc9x9"}))
            ->capture_default_str();
        app.add_option("--min-disp", min_disp, "Smallest disparity")->capture_default_str();
        app.add_option("--max-disp", max_disp, "Largest disparity")->capture_default_str();
        app.add_option("--paths", paths, "Aggregation paths")->check(CLI::IsMember({4, 8}))->capture_default_str();
        app.add_option("--p1", p1, "Small-jump penalty (default depends on --cost)");
        app.add_option("--p2", p2, "Large-jump penalty (default depends on --cost)");
        app.add_flag("--no-subpixel", no_subpixel, "Disable parabola subpixel refinement");
        app.add_option("--consistency", consistency, "Left-right check")
            ->check(CLI::IsMember({"off", "approx", "exact"}))
            ->capture_default_str();
        app.add_option("--lr-threshold", lr_threshold, "Left-right tolerance in pixels")->capture_default_str();
        app.add_flag("--no-median", no_median, "Disable the 3x3 median filter");
        app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    }

    PipelineConfig config() const {
        static const std::map<std::string, CostFunction> costs{{"census5x5", CostFunction::census5x5},
                                                               {"census9x7", CostFunction::census9x7},
                                                               {"ncc5x5", CostFunction::ncc5x5},
                                                               {"ncc9x9", CostFunction::ncc9x9}};
        auto cfg = PipelineConfig::for_cost(costs.at(cost), {min_disp, max_disp});
        if (p1) cfg.p1 = *p1;
        if (p2) cfg.p2 = *p2;
        cfg.paths = paths;
        cfg.subpixel = !no_subpixel;
        cfg.consistency = consistency == "off"      ? Consistency::off
                          : consistency == "exact" ? Consistency::exact
                                                   : Consistency::approximate;
        cfg.consistency_threshold = lr_threshold;
        cfg.median = !no_median;
        cfg.workers = threads;
        if (auto issues = validate_parameters(cfg); !issues.empty()) throw ConfigError(std::move(issues));
        return cfg;
    }
};

inline void attach_report(CLI::App& app, std::string& report) {
    app.add_option("--report", report, "Report format")
        ->check(CLI::IsMember({"text", "json", "json-like"}))
        ->capture_default_str();
}

inline ReportFormat report_format(const std::string& s) { return s == "text" ? ReportFormat::text : ReportFormat::json; }

/// Up-scales `est` by `scale` and checks it now matches `gt`.
inline DisparityMap align_to_gt(const DisparityMap& est, const DisparityMap& gt, int scale) {
    DisparityMap scaled = scale == 1 ? est : rescale_disparity(est, scale);
    if (scaled.width() != gt.width() || scaled.height() != gt.height()) {
        std::ostringstream msg;
        msg << "estimate is " << scaled.width() << "x" << scaled.height() << " after scaling by " << scale
            << ", ground truth is " << gt.width() << "x" << gt.height();
        throw ContractViolation(msg.str());
    }
    return scaled;
}

inline double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(std::vector<std::string> args) {
        CLI::App app{"Dense stereo disparity estimation with semi-global matching", "stereo"};
        app.require_subcommand(1);
        app.set_help_all_flag("--help-all");

        // estimate
        auto* est = app.add_subcommand("estimate", "Compute the disparity map of one rectified pair");
        std::string left, right, out_path, out_format, report = "text";
        PipelineFlags est_flags;
        est->add_option("--left", left, "Left (reference) image")->required();
        est->add_option("--right", right, "Right (matching) image")->required();
        est->add_option("--out", out_path, "Output disparity map")->required();
        est->add_option("--out-format", out_format, "pgm16 or pfm (default: by extension)")
            ->check(CLI::IsMember({"pgm16", "pfm"}));
        est_flags.attach(*est);
        attach_report(*est, report);

        // evaluate
        auto* ev = app.add_subcommand("evaluate", "Compare a disparity map with ground truth");
        std::string est_path, gt_path;
        int scale = 1;
        ev->add_option("--est", est_path, "Estimated disparity map")->required();
        ev->add_option("--gt", gt_path, "Ground-truth disparity map")->required();
        ev->add_option("--scale", scale, "Up-scale the estimate before comparing")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        attach_report(*ev, report);

        // bench
        auto* bench = app.add_subcommand("bench", "Time repeated estimation of one pair");
        PipelineFlags bench_flags;
        int repeat = 5;
        std::optional<double> watts;
        bench->add_option("--left", left, "Left (reference) image")->required();
        bench->add_option("--right", right, "Right (matching) image")->required();
        bench->add_option("--repeat", repeat, "Number of timed runs")->check(CLI::PositiveNumber)->capture_default_str();
        bench->add_option("--watts", watts, "Measured power draw for FPS/W")->check(CLI::PositiveNumber);
        bench_flags.attach(*bench);
        attach_report(*bench, report);

        // dataset
        auto* ds = app.add_subcommand("dataset", "Estimate and evaluate every pair of a dataset");
        PipelineFlags ds_flags;
        std::string root, layout = "pairs";
        int ds_scale = 1;
        std::optional<double> ds_watts;
        ds->add_option("--root", root, "Dataset directory")->required();
        ds->add_option("--layout", layout, "Folder layout")
            ->check(CLI::IsMember({"pairs", "kitti"}))
            ->capture_default_str();
        ds->add_option("--scale", ds_scale, "Up-scale estimates before comparing")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        ds->add_option("--watts", ds_watts, "Measured power draw for FPS/W")->check(CLI::PositiveNumber);
        ds_flags.attach(*ds);
        attach_report(*ds, report);

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            out_ << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out_ << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err_ << "error: " << e.what() << "\n";
            const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
            err_ << sub->help();
            return kExitUsage;
        }

        try {
            if (est->parsed()) return estimate(left, right, out_path, out_format, est_flags, report_format(report));
            if (ev->parsed()) return evaluate(est_path, gt_path, scale, report_format(report));
            if (bench->parsed()) return run_bench(left, right, bench_flags, repeat, watts, report_format(report));
            if (ds->parsed())
                return dataset(root, layout == "kitti" ? DatasetLayout::kitti_like : DatasetLayout::pairs, ds_flags,
                               ds_scale, ds_watts, report_format(report));
        } catch (const ContractViolation& e) {
            err_ << "error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err_ << "error: " << e.what() << "\n";
            return kExitFailure;
        }
        return kExitUsage;
    }

private:
    int estimate(const std::string& left_path, const std::string& right_path, const std::string& out_path,
                 const std::string& out_format, const PipelineFlags& flags, ReportFormat format) {
        const auto cfg = flags.config();
        const auto left = load_gray(left_path);
        const auto right = load_gray(right_path);
        const auto [disp, stats] = stereo::estimate(left, right, cfg);
        const auto enc = out_format.empty() ? encoding_for(out_path)
                         : out_format == "pfm" ? DisparityEncoding::float_map
                                               : DisparityEncoding::fixed256_16bit;
        write_disparity(disp, out_path, enc);
        auto doc = to_report(stats);
        doc.add("density", density(disp).value());
        doc.write(out_, format);
        return kExitOk;
    }

    int evaluate(const std::string& est_path, const std::string& gt_path, int scale, ReportFormat format) {
        const auto gt = load_disparity(gt_path);
        const auto est = align_to_gt(load_disparity(est_path), gt, scale);
        to_report(stereo::evaluate(est, gt)).write(out_, format);
        return kExitOk;
    }

    int run_bench(const std::string& left_path, const std::string& right_path, const PipelineFlags& flags,
                  int repeat, std::optional<double> watts, ReportFormat format) {
        const auto cfg = flags.config();
        const auto left = load_gray(left_path);
        const auto right = load_gray(right_path);
        require_valid(cfg, left, right);
        Workspace ws;
        std::vector<double> times;
        PipelineStats last;
        for (int i = 0; i < repeat; ++i) {
            last = stereo::estimate(left, right, cfg, ws).second;
            times.push_back(last.time_total_s);
        }
        const double t = median_of(times);
        const double mde = throughput_mde_s(left.width(), left.height(), cfg.range.count(), t);
        const double fps = expected_fps(mde, left.width(), left.height(), cfg.range.count());
        Report doc;
        doc.add("width", left.width())
            .add("height", left.height())
            .add("disparities", cfg.range.count())
            .add("repeat", repeat)
            .add("run_times_s", times)
            .add("time_total_s", t)
            .add("mde_per_s", mde)
            .add("fps", fps);
        if (watts) doc.add("watts", *watts).add("fps_per_w", fps_per_watt(fps, *watts));
        doc.write(out_, format);
        return kExitOk;
    }

    int dataset(const std::string& root, DatasetLayout layout, const PipelineFlags& flags, int scale,
                std::optional<double> watts, ReportFormat format) {
        const auto scan = scan_dataset(root, layout);
        for (const auto& w : scan.warnings) err_ << "warning: " << w << "\n";
        if (scan.entries.empty()) {
            err_ << "error: no pairs found in '" << root << "'\n";
            return kExitFailure;
        }
        const auto cfg = flags.config();

        struct Row {
            std::string name;
            std::optional<EvalReport> eval;
            double time_s = 0.0;
            std::string failure;
        };
        std::vector<Row> rows;
        EvalReport pooled;
        bool any_eval = false;
        double total_time = 0.0;
        double total_work = 0.0;
        int failures = 0;
        Workspace ws;

        for (const auto& entry : scan.entries) {
            Row row{entry.name, std::nullopt, 0.0, {}};
            try {
                const auto left = load_gray(entry.left);
                const auto right = load_gray(entry.right);
                const auto [disp, stats] = stereo::estimate(left, right, cfg, ws);
                row.time_s = stats.time_total_s;
                total_time += stats.time_total_s;
                total_work += static_cast<double>(stats.width) * stats.height * stats.disparities;
                if (entry.gt) {
                    const auto gt = load_disparity(*entry.gt);
                    const auto r = stereo::evaluate(align_to_gt(disp, gt, scale), gt);
                    row.eval = r;
                    pool(pooled, r);
                    any_eval = true;
                }
            } catch (const std::exception& e) {
                row.failure = e.what();
                ++failures;
                err_ << "error: " << entry.name << ": " << e.what() << "\n";
            }
            rows.push_back(std::move(row));
        }

        const bool timed = total_time > 0.0;
        const double mde = timed ? total_work / total_time / 1e6 : 0.0;
        const double mean_fps = timed ? static_cast<double>(rows.size() - failures) / total_time : 0.0;

        if (format == ReportFormat::json) {
            nlohmann::ordered_json doc;
            doc["pairs"] = nlohmann::ordered_json::array();
            for (const auto& row : rows) {
                nlohmann::ordered_json j;
                j["name"] = row.name;
                if (!row.failure.empty()) {
                    j["error"] = row.failure;
                } else {
                    j["time_total_s"] = row.time_s;
                    j["metrics"] = row.eval ? to_report(*row.eval).to_json() : nlohmann::ordered_json(nullptr);
                }
                doc["pairs"].push_back(std::move(j));
            }
            doc["mean"] = any_eval ? to_report(pooled).to_json() : nlohmann::ordered_json(nullptr);
            doc["failed"] = failures;
            if (timed) {
                doc["mde_per_s"] = mde;
                doc["fps"] = mean_fps;
                if (watts) doc["fps_per_w"] = fps_per_watt(mean_fps, *watts);
            }
            out_ << doc.dump(2) << "\n";
        } else {
            const auto cell = [](double v) {
                std::ostringstream s;
                s << std::fixed << std::setprecision(4) << v;
                return s.str();
            };
            std::size_t name_width = 4;
            for (const auto& row : rows) name_width = std::max(name_width, row.name.size());
            const auto line = [&](const std::string& name, const std::vector<std::string>& cols) {
                out_ << std::left << std::setw(static_cast<int>(name_width)) << name;
                for (const auto& c : cols) out_ << "  " << std::right << std::setw(10) << c;
                out_ << "\n";
            };
            const auto metric_cols = [&](const EvalReport& r, double time_s) {
                return std::vector<std::string>{cell(r.d1_all_est.value()), cell(r.d1_all_all.value()),
                                                cell(r.bad[0].value()),     cell(r.bad[1].value()),
                                                cell(r.bad[2].value()),     cell(r.bad[3].value()),
                                                cell(r.density.value()),    cell(time_s)};
            };
            line("name", {"d1_all_est", "d1_all_all", "bad_0_5", "bad_1", "bad_2", "bad_4", "density",
                          "time_s"});
            for (const auto& row : rows) {
                if (!row.failure.empty())
                    line(row.name, {"failed"});
                else if (row.eval)
                    line(row.name, metric_cols(*row.eval, row.time_s));
                else
                    line(row.name, {"n/a", "n/a", "n/a", "n/a", "n/a", "n/a", "n/a", cell(row.time_s)});
            }
            if (any_eval)
                line("mean", metric_cols(pooled, rows.size() > static_cast<std::size_t>(failures)
                                                     ? total_time / static_cast<double>(rows.size() - failures)
                                                     : 0.0));
            if (timed) {
                out_ << "mde_per_s=" << Report::format_number(mde) << "\n";
                out_ << "fps=" << Report::format_number(mean_fps) << "\n";
                if (watts) out_ << "fps_per_w=" << Report::format_number(fps_per_watt(mean_fps, *watts)) << "\n";
            }
            out_ << "failed=" << failures << "\n";
        }
        return failures > 0 ? kExitFailure : kExitOk;
    }

    /// Pixel-weighted pooling over pairs.
    static void pool(EvalReport& acc, const EvalReport& r) {
        const auto add = [](Ratio& a, const Ratio& b) {
            a.count += b.count;
            a.total += b.total;
        };
        add(acc.d1_all_est, r.d1_all_est);
        add(acc.d1_all_all, r.d1_all_all);
        for (std::size_t i = 0; i < acc.bad.size(); ++i) add(acc.bad[i], r.bad[i]);
        add(acc.density, r.density);
        acc.gt_pixels += r.gt_pixels;
    }

    std::ostream& out_;
    std::ostream& err_;
};

/// Entry point shared by main() and the tests. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    return Runner(out, err).run(std::move(args));
}

} // namespace stereo::cli
