/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "celltrack/csv_io.hpp"
#include "celltrack/errors.hpp"
#include "celltrack/pipeline.hpp"
#include "celltrack/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace celltrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitPacing = 4;

constexpr double kAhToAs = 3600.0;

void fail_config(const std::string &msg) { throw InvalidConfigError(msg); }

/* ---------------------------------------------------------------- JSON IO */

json load_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open");
    }
    try {
        return json::parse(in);
    }
    catch (const json::exception &e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_json_file(const std::string &path, const ordered_json &doc)
{
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << doc.dump(2) << "\n";
}

void check_keys(const json &obj, const std::set<std::string> &allowed,
                const std::string &ctx)
{
    for (const auto &item : obj.items()) {
        if (!allowed.count(item.key())) {
            fail_config(ctx + ": unknown key \"" + item.key() + "\"");
        }
    }
}

double num_field(const json &obj, const std::string &key,
                 const std::string &ctx)
{
    if (!obj.contains(key)) {
        fail_config(ctx + ": missing \"" + key + "\"");
    }
    if (!obj.at(key).is_number()) {
        fail_config(ctx + ": \"" + key + "\" must be a number");
    }
    return obj.at(key).get<double>();
}

double num_field_or(const json &obj, const std::string &key, double fallback,
                    const std::string &ctx)
{
    return obj.contains(key) ? num_field(obj, key, ctx) : fallback;
}

/* ---------------------------------------------------------------- manifest */

struct Manifest {
    bool loaded = false;
    std::string path;
    std::vector<std::string> telemetry;
    std::string emf;
    std::string spec;
    std::string out;
    json overrides = json::object();
};

Manifest load_manifest(const std::string &path, const std::string &command)
{
    Manifest man;
    man.loaded = true;
    man.path = path;
    json doc = load_json_file(path);
    std::string ctx = "manifest " + path;
    if (!doc.is_object()) {
        fail_config(ctx + ": top level must be an object");
    }
    check_keys(doc, {"schema_version", "command", "inputs", "out", "overrides"},
               ctx);
    if (!doc.contains("schema_version") ||
        doc.at("schema_version") != json(1)) {
        fail_config(ctx + ": schema_version must be 1");
    }
    if (doc.contains("command") &&
        doc.at("command").get<std::string>() != command) {
        fail_config(ctx + ": command \"" +
                    doc.at("command").get<std::string>() +
                    "\" does not match the invoked subcommand \"" + command +
                    "\"");
    }
    if (doc.contains("inputs")) {
        const json &in = doc.at("inputs");
        check_keys(in, {"telemetry", "emf", "spec"}, ctx + " inputs");
        if (in.contains("telemetry")) {
            const json &t = in.at("telemetry");
            if (t.is_array()) {
                for (const auto &p : t) {
                    man.telemetry.push_back(p.get<std::string>());
                }
            }
            else {
                man.telemetry.push_back(t.get<std::string>());
            }
        }
        if (in.contains("emf")) {
            man.emf = in.at("emf").get<std::string>();
        }
        if (in.contains("spec")) {
            man.spec = in.at("spec").get<std::string>();
        }
    }
    if (doc.contains("out")) {
        man.out = doc.at("out").get<std::string>();
    }
    if (doc.contains("overrides")) {
        if (!doc.at("overrides").is_object()) {
            fail_config(ctx + ": overrides must be an object");
        }
        man.overrides = doc.at("overrides");
    }
    return man;
}

/* Precedence for every knob: CLI flag > manifest override > default.
 * Each resolution is echoed with its source for provenance. */
class ConfigResolver {
  public:
    ConfigResolver(const CLI::App &cmd, const json &overrides)
        : cmd_(cmd), ov_(overrides)
    {
    }

    double num(const std::string &flag, double cli_value, double fallback)
    {
        std::string key = flag.substr(2);
        bool in_manifest = note_key(key);
        if (cmd_.count(flag) > 0) {
            return record(key, cli_value, "cli");
        }
        if (in_manifest) {
            return record(key, manifest_num(key), "manifest");
        }
        return record(key, fallback, "default");
    }

    int integer(const std::string &flag, int cli_value, int fallback)
    {
        double v = num(flag, cli_value, fallback);
        int iv = static_cast<int>(v);
        if (static_cast<double>(iv) != v) {
            fail_config(flag.substr(2) + " must be an integer");
        }
        return iv;
    }

    bool flag(const std::string &flag_name, bool fallback)
    {
        std::string key = flag_name.substr(2);
        bool in_manifest = note_key(key);
        if (cmd_.count(flag_name) > 0) {
            resolved_[key] = {{"value", true}, {"source", "cli"}};
            return true;
        }
        if (in_manifest) {
            const json &v = ov_.at(key);
            if (!v.is_boolean()) {
                fail_config("override \"" + key + "\" must be a boolean");
            }
            resolved_[key] = {{"value", v.get<bool>()}, {"source", "manifest"}};
            return v.get<bool>();
        }
        resolved_[key] = {{"value", fallback}, {"source", "default"}};
        return fallback;
    }

    std::string str(const std::string &flag, const std::string &cli_value,
                    const std::string &fallback)
    {
        std::string key = flag.substr(2);
        bool in_manifest = note_key(key);
        if (cmd_.count(flag) > 0) {
            resolved_[key] = {{"value", cli_value}, {"source", "cli"}};
            return cli_value;
        }
        if (in_manifest) {
            const json &v = ov_.at(key);
            if (!v.is_string()) {
                fail_config("override \"" + key + "\" must be a string");
            }
            resolved_[key] = {{"value", v.get<std::string>()},
                              {"source", "manifest"}};
            return v.get<std::string>();
        }
        resolved_[key] = {{"value", fallback}, {"source", "default"}};
        return fallback;
    }

    /* Rejects override keys no knob consumed (typo guard). */
    void finish() const
    {
        for (const auto &item : ov_.items()) {
            if (!used_.count(item.key())) {
                fail_config("unknown config override \"" + item.key() + "\"");
            }
        }
    }

    const ordered_json &resolved() const { return resolved_; }

  private:
    /* A knob consulted the key, so it is recognized even when the CLI wins. */
    bool note_key(const std::string &key)
    {
        bool present = ov_.contains(key);
        if (present) {
            used_.insert(key);
        }
        return present;
    }

    double record(const std::string &key, double v, const char *source)
    {
        resolved_[key] = {{"value", v}, {"source", source}};
        return v;
    }

    double manifest_num(const std::string &key)
    {
        const json &v = ov_.at(key);
        if (v.is_number()) {
            return v.get<double>();
        }
        if (v.is_string()) {
            const std::string &s = v.get<std::string>();
            char *end = nullptr;
            double d = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') {
                fail_config("override \"" + key + "\" is not numeric: " + s);
            }
            return d;
        }
        fail_config("override \"" + key + "\" must be numeric");
        return 0.0;
    }

    const CLI::App &cmd_;
    const json &ov_;
    ordered_json resolved_ = ordered_json::object();
    std::set<std::string> used_;
};

/* ----------------------------------------------------------- shared flags */

struct EstimatorFlags {
    double gamma = 0.999;
    double lambda = 0.7;
    double theta1 = 0.99;
    bool estimate_theta1 = false;
    double meas_noise_var = 2.5e-5;
    std::string segment_mode = "charge-only";
    double min_delta_soc = 0.2;
    bool no_capacity_updates = false;
    int downsample = 1;
    double nominal_capacity_ah = 4.4;
};

void add_estimator_flags(CLI::App *cmd, EstimatorFlags &f)
{
    cmd->add_option("--gamma", f.gamma, "filter forgetting factor in (0,1]");
    cmd->add_option("--lambda", f.lambda,
                    "capacity RLS forgetting factor in (0,1]");
    cmd->add_option("--theta1", f.theta1,
                    "fixed overpotential relaxation rate in (0,1)");
    cmd->add_flag("--estimate-theta1", f.estimate_theta1,
                  "estimate theta1 as an additional state");
    cmd->add_option("--meas-noise-var", f.meas_noise_var,
                    "voltage measurement noise variance [V^2]");
    cmd->add_option("--segment-mode", f.segment_mode,
                    "capacity window policy: charge-only | any-window");
    cmd->add_option("--min-delta-soc", f.min_delta_soc,
                    "minimum SoC swing for a capacity window");
    cmd->add_flag("--no-capacity-updates", f.no_capacity_updates,
                  "keep capacity frozen at the nominal value");
    cmd->add_option("--downsample", f.downsample,
                    "aggregate every N telemetry rows into one");
    cmd->add_option("--nominal-capacity-ah", f.nominal_capacity_ah,
                    "initial capacity estimate [Ah]");
}

struct ResolvedEstimator {
    PipelineConfig cfg;
    int downsample = 1;
    ordered_json echo;
};

ResolvedEstimator resolve_estimator(const CLI::App &cmd, const json &overrides,
                                    const EstimatorFlags &f,
                                    ConfigResolver &res)
{
    ResolvedEstimator r;
    r.cfg.jekf.gamma = res.num("--gamma", f.gamma, 0.999);
    r.cfg.rls_lambda = res.num("--lambda", f.lambda, 0.7);
    r.cfg.jekf.theta1_fixed = res.num("--theta1", f.theta1, 0.99);
    r.cfg.jekf.estimate_theta1 = res.flag("--estimate-theta1", false);
    r.cfg.jekf.meas_noise_var =
        res.num("--meas-noise-var", f.meas_noise_var, 2.5e-5);
    std::string mode =
        res.str("--segment-mode", f.segment_mode, "charge-only");
    if (mode == "charge-only") {
        r.cfg.policy.mode = SegmentMode::ChargeOnly;
    }
    else if (mode == "any-window") {
        r.cfg.policy.mode = SegmentMode::AnySoCWindow;
    }
    else {
        fail_config("segment-mode must be charge-only or any-window, got \"" +
                    mode + "\"");
    }
    r.cfg.policy.min_delta_soc = res.num("--min-delta-soc", f.min_delta_soc, 0.2);
    r.cfg.capacity_updates_enabled = !res.flag("--no-capacity-updates", false);
    r.downsample = res.integer("--downsample", f.downsample, 1);
    if (r.downsample < 1) {
        fail_config("downsample must be >= 1");
    }
    r.cfg.nominal_capacity =
        res.num("--nominal-capacity-ah", f.nominal_capacity_ah, 4.4) * kAhToAs;
    (void)cmd;
    (void)overrides;
    return r;
}

void require_input_exists(const std::string &path, const std::string &what)
{
    if (path.empty()) {
        fail_config("missing " + what + " path (flag or manifest)");
    }
    if (!fs::exists(path)) {
        throw ParseError(path + ": " + what + " file does not exist");
    }
}

EmfCurve load_emf_or_default(const std::string &path)
{
    if (path.empty()) {
        return default_emf_curve();
    }
    require_input_exists(path, "EMF");
    return parse_emf_csv(path);
}

void write_resolved_config(const std::string &out_dir,
                           const std::string &command,
                           const ordered_json &inputs,
                           const ordered_json &config)
{
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["command"] = command;
    doc["inputs"] = inputs;
    doc["config"] = config;
    write_json_file(out_dir + "/resolved_config.json", doc);
}

ordered_json summary_to_json(const RunSummary &sum)
{
    ordered_json j;
    j["samples"] = sum.samples;
    j["rms_mv"] = sum.rms_voltage_error * 1e3;
    j["c_hat_final_ah"] = sum.c_hat_final / kAhToAs;
    j["mean_theta2_mohm"] = sum.mean_theta2 * 1e3;
    j["mean_theta3_mohm"] = sum.mean_theta3 * 1e3;
    j["segments_opened"] = sum.segments_opened;
    j["segments_accepted"] = sum.segments_accepted;
    j["segments_discarded"] = sum.segments_discarded;
    j["stability_flags"] = sum.stability_flags;
    j["segment_open_at_eof"] = sum.segment_open_at_eof;
    return j;
}

void print_summary(const RunSummary &sum)
{
    std::printf("samples            %zu\n", sum.samples);
    std::printf("rms error          %.3f mV\n", sum.rms_voltage_error * 1e3);
    std::printf("final capacity     %.4f Ah\n", sum.c_hat_final / kAhToAs);
    std::printf("mean theta2        %.4f mOhm\n", sum.mean_theta2 * 1e3);
    std::printf("mean theta3        %.4f mOhm\n", sum.mean_theta3 * 1e3);
    std::printf("segments           %ld opened, %ld accepted, %ld discarded\n",
                sum.segments_opened, sum.segments_accepted,
                sum.segments_discarded);
    std::printf("stability flags    %ld\n", sum.stability_flags);
}

/* ----------------------------------------------------------- simulate cmd */

Phase parse_phase(const json &obj, std::size_t index)
{
    std::string ctx = "phase " + std::to_string(index + 1);
    if (!obj.is_object() || !obj.contains("type")) {
        fail_config(ctx + ": needs a \"type\"");
    }
    std::string type = obj.at("type").get<std::string>();
    if (type == "rest") {
        check_keys(obj, {"type", "duration_s"}, ctx);
        return Rest{num_field(obj, "duration_s", ctx)};
    }
    if (type == "drive") {
        check_keys(obj, {"type", "duration_s", "mean_a", "variability_a"}, ctx);
        return DrivePulse{num_field(obj, "duration_s", ctx),
                          num_field(obj, "mean_a", ctx),
                          num_field_or(obj, "variability_a", 0.0, ctx)};
    }
    if (type == "cc_charge") {
        check_keys(obj, {"type", "current_a", "target_v"}, ctx);
        return CcCharge{num_field(obj, "current_a", ctx),
                        num_field(obj, "target_v", ctx)};
    }
    if (type == "cv_hold") {
        check_keys(obj, {"type", "target_v", "cutoff_a"}, ctx);
        return CvHold{num_field(obj, "target_v", ctx),
                      num_field(obj, "cutoff_a", ctx)};
    }
    fail_config(ctx + ": unknown type \"" + type + "\"");
    return Rest{0.0};
}

int cmd_simulate(const std::string &spec_path, const std::string &out_dir,
                 std::uint64_t seed, const ordered_json &config_echo)
{
    json doc = load_json_file(spec_path);
    std::string ctx = "spec " + spec_path;
    if (!doc.is_object()) {
        fail_config(ctx + ": top level must be an object");
    }
    check_keys(doc, {"phases", "repeat", "cell", "emf_csv"}, ctx);
    if (!doc.contains("phases") || !doc.at("phases").is_array() ||
        doc.at("phases").empty()) {
        fail_config(ctx + ": needs a non-empty \"phases\" array");
    }

    CycleSpec spec;
    for (std::size_t i = 0; i < doc.at("phases").size(); ++i) {
        spec.phases.push_back(parse_phase(doc.at("phases")[i], i));
    }
    spec.repeat_count =
        static_cast<int>(num_field_or(doc, "repeat", 1.0, ctx));

    json cell_obj = doc.contains("cell") ? doc.at("cell") : json::object();
    check_keys(cell_obj,
               {"capacity_ah", "r0_ohm", "r1_ohm", "c1_farad", "s_init",
                "voltage_noise_std", "current_noise_std", "capacity_scale",
                "resistance_scale"},
               ctx + " cell");

    EmfCurve curve = default_emf_curve();
    if (doc.contains("emf_csv")) {
        std::string path = doc.at("emf_csv").get<std::string>();
        require_input_exists(path, "EMF");
        curve = parse_emf_csv(path);
    }

    TruthCellConfig cell{
        {num_field_or(cell_obj, "r0_ohm", 0.0176, ctx),
         num_field_or(cell_obj, "r1_ohm", 0.01, ctx),
         num_field_or(cell_obj, "c1_farad", 37.159539512266902, ctx),
         num_field_or(cell_obj, "capacity_ah", 4.72, ctx) * kAhToAs},
        curve,
        num_field_or(cell_obj, "s_init", 0.9, ctx),
    };
    cell.voltage_noise_std =
        num_field_or(cell_obj, "voltage_noise_std", 1e-3, ctx);
    cell.current_noise_std =
        num_field_or(cell_obj, "current_noise_std", 0.0, ctx);
    cell.seed = seed;
    cell = aging_variant(cell,
                         num_field_or(cell_obj, "capacity_scale", 1.0, ctx),
                         num_field_or(cell_obj, "resistance_scale", 1.0, ctx));

    SimResult sim = generate_cycle(spec, cell);

    fs::create_directories(out_dir);
    write_telemetry_csv(out_dir + "/telemetry.csv", sim.samples);
    write_truth_csv(out_dir + "/truth.csv", sim.truth);
    write_emf_csv(out_dir + "/emf.csv", cell.emf);

    ordered_json cell_doc;
    cell_doc["capacity_ah"] = cell.ecm.capacity / kAhToAs;
    cell_doc["r0_ohm"] = cell.ecm.r0;
    cell_doc["r1_ohm"] = cell.ecm.r1;
    cell_doc["c1_farad"] = cell.ecm.c1;
    cell_doc["s_init"] = cell.s_init;
    cell_doc["voltage_noise_std"] = cell.voltage_noise_std;
    cell_doc["current_noise_std"] = cell.current_noise_std;
    cell_doc["seed"] = cell.seed;
    cell_doc["theta"] = {{"theta1", sim.theta.theta1},
                         {"theta2", sim.theta.theta2},
                         {"theta3", sim.theta.theta3},
                         {"tau", sim.theta.tau}};
    cell_doc["samples"] = sim.samples.size();
    write_json_file(out_dir + "/cell.json", cell_doc);

    ordered_json inputs;
    inputs["spec"] = spec_path;
    write_resolved_config(out_dir, "simulate", inputs, config_echo);

    std::printf("wrote %zu samples to %s\n", sim.samples.size(),
                out_dir.c_str());
    return kExitOk;
}

/* ----------------------------------------------------------- estimate cmd */

int cmd_estimate(const std::string &telemetry_path,
                 const std::string &emf_path, const std::string &out_dir,
                 const ResolvedEstimator &est)
{
    require_input_exists(telemetry_path, "telemetry");
    EmfCurve curve = load_emf_or_default(emf_path);
    std::vector<Sample> samples =
        parse_telemetry_csv(telemetry_path, est.downsample);

    fs::create_directories(out_dir);
    RecordCsvWriter writer(out_dir + "/records.csv");
    RunSummary sum = pipeline_run(samples, curve, est.cfg,
                                  [&writer](const EstimateRecord &rec) {
                                      writer.write(rec);
                                  });
    write_json_file(out_dir + "/summary.json", summary_to_json(sum));

    ordered_json inputs;
    inputs["telemetry"] = telemetry_path;
    inputs["emf"] = emf_path.empty() ? "(builtin)" : emf_path;
    write_resolved_config(out_dir, "estimate", inputs, est.echo);

    print_summary(sum);
    return kExitOk;
}

/* ------------------------------------------------------------- stream cmd */

class SampleQueue {
  public:
    /* Returns false once the queue is closed. */
    bool push(const Sample &s)
    {
        std::unique_lock<std::mutex> lk(m_);
        not_full_.wait(lk, [this] { return q_.size() < kCap || closed_; });
        if (closed_) {
            return false;
        }
        q_.push_back(s);
        not_empty_.notify_one();
        return true;
    }

    std::optional<Sample> pop()
    {
        std::unique_lock<std::mutex> lk(m_);
        not_empty_.wait(lk, [this] { return !q_.empty() || closed_; });
        if (q_.empty()) {
            return std::nullopt;
        }
        Sample s = q_.front();
        q_.pop_front();
        not_full_.notify_one();
        return s;
    }

    void close()
    {
        std::lock_guard<std::mutex> lk(m_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

  private:
    static constexpr std::size_t kCap = 1024;
    std::mutex m_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<Sample> q_;
    bool closed_ = false;
};

void print_stream_record(const EstimateRecord &rec)
{
    std::printf("t=%.10g soc=%.10g c_ah=%.10g theta2_mohm=%.10g "
                "theta3_mohm=%.10g yhat_v=%.10g\n",
                rec.t, rec.s_hat, rec.c_hat / kAhToAs, rec.theta2 * 1e3,
                rec.theta3 * 1e3, rec.y_hat);
    if (rec.segment_event != SegmentEvent::None) {
        if (rec.segment_event == SegmentEvent::ClosedAccepted) {
            std::printf("event=segment_closed_accepted t=%.10g c_ah=%.10g\n",
                        rec.t, rec.c_hat / kAhToAs);
        }
        else {
            std::printf("event=segment_%s t=%.10g\n",
                        segment_event_name(rec.segment_event), rec.t);
        }
    }
    if (rec.stability_flag) {
        std::printf("event=stability_flag t=%.10g\n", rec.t);
    }
    std::fflush(stdout);
}

int cmd_stream(const std::string &telemetry_path, const std::string &emf_path,
               const std::string &out_dir, double pace,
               const ResolvedEstimator &est)
{
    require_input_exists(telemetry_path, "telemetry");
    if (pace < 0.0) {
        fail_config("pace must be >= 0");
    }
    EmfCurve curve = load_emf_or_default(emf_path);
    std::vector<Sample> samples =
        parse_telemetry_csv(telemetry_path, est.downsample);
    if (samples.empty()) {
        throw PipelineAbortError("empty sample stream");
    }

    std::optional<RecordCsvWriter> writer;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        writer.emplace(out_dir + "/records.csv");
    }

    SampleQueue queue;
    std::atomic<bool> pace_failed{false};
    double tau = est.cfg.jekf.tau;

    std::thread producer([&] {
        using clock = std::chrono::steady_clock;
        clock::time_point start = clock::now();
        double t0 = samples.front().t;
        for (const Sample &s : samples) {
            if (pace > 0.0) {
                std::chrono::duration<double> offset((s.t - t0) / pace);
                clock::time_point sched =
                    start +
                    std::chrono::duration_cast<clock::duration>(offset);
                std::this_thread::sleep_until(sched);
                double behind =
                    std::chrono::duration<double>(clock::now() - sched)
                        .count();
                if (behind > 10.0 * tau / pace) {
                    pace_failed = true;
                    break;
                }
            }
            if (!queue.push(s)) {
                break;
            }
        }
        queue.close();
    });

    PipelineRunner runner(curve, est.cfg);
    RunSummary sum;
    try {
        while (std::optional<Sample> s = queue.pop()) {
            EstimateRecord rec = runner.step(*s);
            print_stream_record(rec);
            if (writer) {
                writer->write(rec);
            }
        }
        sum = runner.summary();
    }
    catch (...) {
        queue.close();
        producer.join();
        throw;
    }
    producer.join();

    if (!out_dir.empty()) {
        write_json_file(out_dir + "/summary.json", summary_to_json(sum));
        ordered_json inputs;
        inputs["telemetry"] = telemetry_path;
        inputs["emf"] = emf_path.empty() ? "(builtin)" : emf_path;
        write_resolved_config(out_dir, "stream", inputs, est.echo);
    }

    if (pace_failed) {
        std::fprintf(stderr,
                     "error: replay fell behind the paced schedule by more "
                     "than %g sample periods\n",
                     10.0);
        return kExitPacing;
    }
    return kExitOk;
}

/* -------------------------------------------------------- aging-suite cmd */

int cmd_aging_suite(const std::vector<std::string> &telemetry_paths,
                    const std::string &emf_path, const std::string &out_dir,
                    const ResolvedEstimator &est)
{
    if (telemetry_paths.size() < 2) {
        fail_config("aging-suite needs at least two --telemetry inputs");
    }
    for (const std::string &p : telemetry_paths) {
        require_input_exists(p, "telemetry");
    }
    EmfCurve curve = load_emf_or_default(emf_path);

    std::vector<std::vector<Sample>> datasets;
    for (const std::string &p : telemetry_paths) {
        datasets.push_back(parse_telemetry_csv(p, est.downsample));
    }
    AgingReport report = run_aging_suite(datasets, curve, est.cfg);

    std::printf("%-32s %10s %10s %18s %18s %8s\n", "telemetry", "samples",
                "c_hat_ah", "mean_theta2_mohm", "mean_theta3_mohm", "rms_mv");
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const AgingRow &row = report.rows[i];
        std::printf("%-32s %10zu %10.4f %18.4f %18.4f %8.3f\n",
                    telemetry_paths[i].c_str(), row.samples,
                    row.c_hat_final / kAhToAs, row.mean_theta2 * 1e3,
                    row.mean_theta3 * 1e3, row.rms_voltage_error * 1e3);
    }
    std::printf("capacity_decreasing=%s theta2_increasing=%s "
                "theta3_increasing=%s\n",
                report.capacity_decreasing ? "true" : "false",
                report.theta2_increasing ? "true" : "false",
                report.theta3_increasing ? "true" : "false");

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        ordered_json doc;
        doc["rows"] = ordered_json::array();
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            const AgingRow &row = report.rows[i];
            ordered_json r;
            r["telemetry"] = telemetry_paths[i];
            r["samples"] = row.samples;
            r["c_hat_final_ah"] = row.c_hat_final / kAhToAs;
            r["mean_theta2_mohm"] = row.mean_theta2 * 1e3;
            r["mean_theta3_mohm"] = row.mean_theta3 * 1e3;
            r["rms_mv"] = row.rms_voltage_error * 1e3;
            doc["rows"].push_back(r);
        }
        doc["capacity_decreasing"] = report.capacity_decreasing;
        doc["theta2_increasing"] = report.theta2_increasing;
        doc["theta3_increasing"] = report.theta3_increasing;
        write_json_file(out_dir + "/aging_report.json", doc);

        ordered_json inputs;
        inputs["telemetry"] = telemetry_paths;
        inputs["emf"] = emf_path.empty() ? "(builtin)" : emf_path;
        write_resolved_config(out_dir, "aging-suite", inputs, est.echo);
    }
    return kExitOk;
}

/* -------------------------------------------------------------- bench cmd */

int cmd_bench(double min_seconds, std::uint64_t seed)
{
    TruthCellConfig cell{
        {0.0176, 0.01, 37.159539512266902, 4.72 * kAhToAs},
        default_emf_curve(),
        0.9,
    };
    cell.voltage_noise_std = 1e-3;
    cell.seed = seed;
    CycleSpec spec{{Rest{120.0}, DrivePulse{2280.0, -2.62, 2.36}, Rest{300.0},
                    CcCharge{4.72, 4.15}, CvHold{4.15, 0.236}, Rest{150.0}},
                   2};
    SimResult sim = generate_cycle(spec, cell);

    PipelineConfig cfg;
    cfg.nominal_capacity = 4.4 * kAhToAs;
    EmfCurve curve = default_emf_curve();

    using clock = std::chrono::steady_clock;
    std::size_t steps = 0;
    int runs = 0;
    /* Warm-up run keeps one-time costs out of the measurement. */
    pipeline_run(sim.samples, curve, cfg, RecordSink{});
    clock::time_point start = clock::now();
    double elapsed = 0.0;
    do {
        PipelineRunner runner(curve, cfg);
        for (const Sample &s : sim.samples) {
            runner.step(s);
        }
        steps += sim.samples.size();
        runs += 1;
        elapsed = std::chrono::duration<double>(clock::now() - start).count();
    } while (elapsed < min_seconds);

    double rate = static_cast<double>(steps) / elapsed;
    std::printf("samples_per_run %zu\n", sim.samples.size());
    std::printf("runs %d\n", runs);
    std::printf("elapsed_s %.3f\n", elapsed);
    std::printf("pipeline_steps_per_second %.0f\n", rate);
    return kExitOk;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"battery SoC, impedance, and capacity estimator"};
    app.require_subcommand(1);

    std::string manifest_path;
    std::string telemetry;
    std::vector<std::string> telemetry_list;
    std::string emf;
    std::string spec_path;
    std::string out_dir;
    double pace = 1.0;
    std::uint64_t seed = 1;
    double bench_seconds = 1.0;
    EstimatorFlags est_flags;
    EstimatorFlags stream_flags;
    EstimatorFlags aging_flags;

    CLI::App *sim = app.add_subcommand(
        "simulate", "generate synthetic telemetry from a phase spec");
    sim->add_option("--spec", spec_path, "phase spec JSON file");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--seed", seed, "simulation seed");
    sim->add_option("--manifest", manifest_path, "run manifest JSON");

    CLI::App *est = app.add_subcommand(
        "estimate", "run the estimator offline over a telemetry file");
    est->add_option("--telemetry", telemetry, "telemetry CSV");
    est->add_option("--emf", emf, "EMF curve CSV (builtin curve when absent)");
    est->add_option("--out", out_dir, "output directory");
    est->add_option("--manifest", manifest_path, "run manifest JSON");
    add_estimator_flags(est, est_flags);

    CLI::App *stream = app.add_subcommand(
        "stream", "replay telemetry at a wall-clock pace, emitting estimates "
                  "per sample");
    stream->add_option("--telemetry", telemetry, "telemetry CSV");
    stream->add_option("--emf", emf,
                       "EMF curve CSV (builtin curve when absent)");
    stream->add_option("--out", out_dir,
                       "optional output directory for records and summary");
    stream->add_option("--pace", pace,
                       "replay speed factor; 0 = as fast as possible");
    stream->add_option("--manifest", manifest_path, "run manifest JSON");
    add_estimator_flags(stream, stream_flags);

    CLI::App *aging = app.add_subcommand(
        "aging-suite", "run the estimator over several telemetry files and "
                       "report health trends");
    aging->add_option("--telemetry", telemetry_list,
                      "telemetry CSVs, oldest cell last");
    aging->add_option("--emf", emf,
                      "EMF curve CSV (builtin curve when absent)");
    aging->add_option("--out", out_dir, "optional output directory");
    aging->add_option("--manifest", manifest_path, "run manifest JSON");
    add_estimator_flags(aging, aging_flags);

    CLI::App *bench = app.add_subcommand(
        "bench", "measure single-threaded estimator throughput");
    bench->add_option("--seconds", bench_seconds,
                      "minimum measurement window");
    bench->add_option("--seed", seed, "corpus seed");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        Manifest man;
        CLI::App *active = app.get_subcommands().front();
        const CLI::Option *mopt = active->get_option_no_throw("--manifest");
        if (mopt != nullptr && mopt->count() > 0) {
            require_input_exists(manifest_path, "manifest");
            man = load_manifest(manifest_path, active->get_name());
        }

        auto pick_path = [](const CLI::App *cmd, const char *flag,
                            const std::string &cli_value,
                            const std::string &man_value) {
            return cmd->count(flag) > 0 ? cli_value
                                        : (man_value.empty() ? cli_value
                                                             : man_value);
        };

        if (sim->parsed()) {
            ConfigResolver res(*sim, man.overrides);
            std::uint64_t rseed = static_cast<std::uint64_t>(
                res.num("--seed", static_cast<double>(seed), 1.0));
            res.finish();
            std::string spec_file = pick_path(sim, "--spec", spec_path,
                                              man.spec);
            std::string out = pick_path(sim, "--out", out_dir, man.out);
            require_input_exists(spec_file, "spec");
            if (out.empty()) {
                fail_config("simulate needs --out (flag or manifest)");
            }
            return cmd_simulate(spec_file, out, rseed, res.resolved());
        }
        if (est->parsed()) {
            ConfigResolver res(*est, man.overrides);
            ResolvedEstimator r =
                resolve_estimator(*est, man.overrides, est_flags, res);
            res.finish();
            r.echo = res.resolved();
            std::string tele = pick_path(est, "--telemetry", telemetry,
                                         man.telemetry.empty()
                                             ? std::string()
                                             : man.telemetry.front());
            std::string emf_file = pick_path(est, "--emf", emf, man.emf);
            std::string out = pick_path(est, "--out", out_dir, man.out);
            if (out.empty()) {
                fail_config("estimate needs --out (flag or manifest)");
            }
            return cmd_estimate(tele, emf_file, out, r);
        }
        if (stream->parsed()) {
            ConfigResolver res(*stream, man.overrides);
            ResolvedEstimator r =
                resolve_estimator(*stream, man.overrides, stream_flags, res);
            double rpace = res.num("--pace", pace, 1.0);
            res.finish();
            r.echo = res.resolved();
            std::string tele = pick_path(stream, "--telemetry", telemetry,
                                         man.telemetry.empty()
                                             ? std::string()
                                             : man.telemetry.front());
            std::string emf_file = pick_path(stream, "--emf", emf, man.emf);
            std::string out = pick_path(stream, "--out", out_dir, man.out);
            return cmd_stream(tele, emf_file, out, rpace, r);
        }
        if (aging->parsed()) {
            ConfigResolver res(*aging, man.overrides);
            ResolvedEstimator r =
                resolve_estimator(*aging, man.overrides, aging_flags, res);
            res.finish();
            r.echo = res.resolved();
            std::vector<std::string> paths = telemetry_list.empty()
                                                 ? man.telemetry
                                                 : telemetry_list;
            std::string emf_file = pick_path(aging, "--emf", emf, man.emf);
            std::string out = pick_path(aging, "--out", out_dir, man.out);
            return cmd_aging_suite(paths, emf_file, out, r);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_seconds, seed);
        }
        return kExitParse;
    }
    catch (const ParseError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    }
    catch (const InvalidConfigError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    }
    catch (const json::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    }
    catch (const Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
