/*
 * Copyright (c) The Celltrack Project Contributors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef CELLTRACK_CSV_IO_HPP
#define CELLTRACK_CSV_IO_HPP

#include <fstream>
#include <string>
#include <vector>

#include "celltrack/emf.hpp"
#include "celltrack/model.hpp"
#include "celltrack/pipeline.hpp"
#include "celltrack/simulator.hpp"

namespace celltrack {

/*
 * Header `t_s,current_a,voltage_v` with optional `temp_c`. Timestamps must
 * be strictly increasing. downsample = N > 1 keeps every Nth row's time and
 * voltage while averaging the current over the N-row block (sum/N even for
 * a short trailing block), so integrated charge is preserved exactly.
 * Throws ParseError naming file and line.
 */
std::vector<Sample> parse_telemetry_csv(const std::string &path,
                                        int downsample = 1);

/* Header `soc,voltage_v`, rows sorted by soc. Rejects non-monotonic data. */
EmfCurve parse_emf_csv(const std::string &path);

void write_telemetry_csv(const std::string &path,
                         const std::vector<Sample> &samples);

void write_truth_csv(const std::string &path,
                     const std::vector<TruthRecord> &truth);

void write_emf_csv(const std::string &path, const EmfCurve &curve);

const char *segment_event_name(SegmentEvent ev);

/* Streaming records.csv writer; numbers are written round-trip exact so
 * repeated runs are byte-identical. */
class RecordCsvWriter {
  public:
    explicit RecordCsvWriter(const std::string &path);
    void write(const EstimateRecord &rec);

  private:
    std::ofstream out_;
};

void write_records_csv(const std::string &path,
                       const std::vector<EstimateRecord> &records);

} // namespace celltrack

#endif
