#pragma once

#include <json.hpp>

#include <string>

#include "tmex/causal.hpp"
#include "tmex/citest.hpp"
#include "tmex/measurement.hpp"
#include "tmex/scm.hpp"
#include "tmex/tmex_score.hpp"

namespace tmex {

using Json = nlohmann::ordered_json;

// JSON codecs. Parsers throw DataError naming the offending key.
Json dag_to_json(const Dag& dag);
Dag dag_from_json(const Json& j);

Json scm_to_json(const ScmSpec& spec);
ScmSpec scm_from_json(const Json& j);

Json measurement_model_to_json(const MeasurementModel& model);
MeasurementModel measurement_model_from_json(const Json& j);

Json regressor_to_json(const RegressorSpec& spec);
RegressorSpec regressor_from_json(const Json& j);

Json citest_config_to_json(const CiTestConfig& cfg);
CiTestConfig citest_config_from_json(const Json& j);

Json tmex_report_to_json(const TmexReport& report);

Json ate_result_to_json(const AteResult& result);

// Paired-dataset CSV: header z1..zN, then zhat_<j>_<k> (1-based block and
// coordinate). Numbers at 17 significant digits; rewriting the same data
// reproduces the file byte for byte.
void write_dataset_csv(const PairedDataset& ds, const std::string& path);
PairedDataset read_dataset_csv(const std::string& path);

// p-value matrix CSV with row labels z<i> and column labels A<j>.
void write_pvalue_csv(const TmexReport& report, const std::string& path);

std::string format_double(double v);  // %.17g

Json load_json_file(const std::string& path);
void write_json_file(const Json& j, const std::string& path);
void write_text_file(const std::string& text, const std::string& path);

}  // namespace tmex
