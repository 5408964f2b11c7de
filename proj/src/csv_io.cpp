/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "celltrack/csv_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "celltrack/errors.hpp"

namespace celltrack {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string &s)
{
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(const std::string &path, long line, const std::string &msg)
{
    std::ostringstream os;
    os << path << ":" << line << ": " << msg;
    throw ParseError(os.str());
}

double parse_double(const std::string &path, long line, const std::string &field)
{
    const char *begin = field.c_str();
    char *end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        fail(path, line, "not a number: '" + field + "'");
    }
    return v;
}

std::ifstream open_input(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(path + ": cannot open");
    }
    return in;
}

std::ofstream open_output(const std::string &path)
{
    std::ofstream out(path);
    if (!out) {
        throw ParseError(path + ": cannot open for writing");
    }
    return out;
}

} // namespace

std::vector<Sample> parse_telemetry_csv(const std::string &path, int downsample)
{
    if (downsample < 1) {
        throw InvalidConfigError("downsample must be at least 1");
    }
    std::ifstream in = open_input(path);
    std::string line;
    long lineno = 0;

    if (!std::getline(in, line)) {
        fail(path, 1, "missing header");
    }
    lineno = 1;
    std::vector<std::string> hdr = split_csv(line);
    bool has_temp = false;
    if (hdr.size() == 4 && hdr[3] == "temp_c") {
        has_temp = true;
    }
    else if (hdr.size() != 3) {
        fail(path, 1, "expected header t_s,current_a,voltage_v[,temp_c]");
    }
    if (hdr[0] != "t_s" || hdr[1] != "current_a" || hdr[2] != "voltage_v") {
        fail(path, 1, "expected header t_s,current_a,voltage_v[,temp_c]");
    }

    std::vector<Sample> out;
    double prev_t = 0.0;
    bool have_prev = false;
    double group_u = 0.0;
    int group_n = 0;
    double last_y = 0.0;
    std::optional<double> last_temp;

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> f = split_csv(line);
        if (f.size() != hdr.size()) {
            fail(path, lineno, "wrong number of columns");
        }
        Sample smp;
        smp.t = parse_double(path, lineno, f[0]);
        smp.u = parse_double(path, lineno, f[1]);
        smp.y = parse_double(path, lineno, f[2]);
        if (has_temp) {
            smp.temp = parse_double(path, lineno, f[3]);
        }
        if (have_prev && !(smp.t > prev_t)) {
            fail(path, lineno, "timestamps not strictly increasing");
        }
        prev_t = smp.t;
        have_prev = true;
        last_y = smp.y;
        last_temp = smp.temp;

        group_u += smp.u;
        group_n += 1;
        if (group_n == downsample) {
            smp.u = group_u / downsample;
            out.push_back(smp);
            group_u = 0.0;
            group_n = 0;
        }
    }
    if (group_n > 0 && downsample > 1) {
        /* Short trailing block: still divide by N, so integrated charge at
         * the downsampled period stays exact. */
        Sample smp;
        smp.t = prev_t;
        smp.u = group_u / downsample;
        smp.y = last_y;
        smp.temp = last_temp;
        out.push_back(smp);
    }
    if (out.empty()) {
        fail(path, lineno, "empty data section");
    }
    return out;
}

EmfCurve parse_emf_csv(const std::string &path)
{
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        fail(path, 1, "missing header");
    }
    std::vector<std::string> hdr = split_csv(line);
    if (hdr.size() != 2 || hdr[0] != "soc" || hdr[1] != "voltage_v") {
        fail(path, 1, "expected header soc,voltage_v");
    }
    std::vector<double> soc;
    std::vector<double> v;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 2) {
            fail(path, lineno, "wrong number of columns");
        }
        soc.push_back(parse_double(path, lineno, f[0]));
        v.push_back(parse_double(path, lineno, f[1]));
    }
    try {
        return EmfCurve(std::move(soc), std::move(v));
    }
    catch (const InvalidConfigError &e) {
        throw ParseError(path + ": " + e.what());
    }
}

void write_telemetry_csv(const std::string &path,
                         const std::vector<Sample> &samples)
{
    std::ofstream out = open_output(path);
    bool has_temp = !samples.empty() && samples.front().temp.has_value();
    out << "t_s,current_a,voltage_v" << (has_temp ? ",temp_c" : "") << "\n";
    for (const Sample &s : samples) {
        out << fmt(s.t) << ',' << fmt(s.u) << ',' << fmt(s.y);
        if (has_temp) {
            out << ',' << fmt(s.temp.value_or(0.0));
        }
        out << "\n";
    }
}

void write_truth_csv(const std::string &path,
                     const std::vector<TruthRecord> &truth)
{
    std::ofstream out = open_output(path);
    out << "t_s,soc_true,overpotential_v\n";
    for (const TruthRecord &r : truth) {
        out << fmt(r.t) << ',' << fmt(r.soc) << ',' << fmt(r.overpotential)
            << "\n";
    }
}

void write_emf_csv(const std::string &path, const EmfCurve &curve)
{
    std::ofstream out = open_output(path);
    out << "soc,voltage_v\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out << fmt(curve.soc()[i]) << ',' << fmt(curve.voltage()[i]) << "\n";
    }
}

const char *segment_event_name(SegmentEvent ev)
{
    switch (ev) {
    case SegmentEvent::Opened:
        return "opened";
    case SegmentEvent::ClosedAccepted:
        return "closed_accepted";
    case SegmentEvent::ClosedDiscarded:
        return "closed_discarded";
    case SegmentEvent::None:
        break;
    }
    return "";
}

RecordCsvWriter::RecordCsvWriter(const std::string &path)
    : out_(open_output(path))
{
    out_ << "t_s,s_hat,o_hat,theta1,theta2_ohm,theta3_ohm,y_hat_v,"
            "innovation_v,c_hat_as,segment_event,stability_flag\n";
}

void RecordCsvWriter::write(const EstimateRecord &rec)
{
    out_ << fmt(rec.t) << ',' << fmt(rec.s_hat) << ',' << fmt(rec.o_hat) << ','
         << fmt(rec.theta1) << ',' << fmt(rec.theta2) << ',' << fmt(rec.theta3)
         << ',' << fmt(rec.y_hat) << ',' << fmt(rec.innovation) << ','
         << fmt(rec.c_hat) << ',' << segment_event_name(rec.segment_event)
         << ',' << (rec.stability_flag ? 1 : 0) << "\n";
}

void write_records_csv(const std::string &path,
                       const std::vector<EstimateRecord> &records)
{
    RecordCsvWriter w(path);
    for (const EstimateRecord &r : records) {
        w.write(r);
    }
}

} // namespace celltrack
