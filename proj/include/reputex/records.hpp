#pragma once

// Line-oriented JSON records shared by the store, the service and the CLI's
// structured output.

#include <json.hpp>

#include <cstdint>
#include <string>

#include "reputex/domain.hpp"
#include "reputex/error.hpp"
#include "reputex/topics.hpp"

namespace reputex {

using json = nlohmann::json;

// Field names are fixed: description, classification, posted_date,
// source_url, fetched_at. The company is implied by where the record lives.
inline json review_to_json(const Review& r) {
  json j;
  j["description"] = r.description;
  j["classification"] = std::string(to_string(r.classification));
  j["posted_date"] = format_date_iso(r.posted_date);
  j["source_url"] = r.source_url;
  j["fetched_at"] = format_timestamp(r.fetched_at);
  return j;
}

inline Review review_from_json(const json& j, const std::string& company_slug) {
  try {
    Review r;
    r.company_slug = company_slug;
    r.description = j.at("description").get<std::string>();
    r.classification = parse_classification(j.at("classification").get<std::string>());
    r.posted_date = parse_review_date(j.at("posted_date").get<std::string>());
    r.source_url = j.at("source_url").get<std::string>();
    r.fetched_at = parse_timestamp(j.at("fetched_at").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_record, std::string("malformed review record: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::invalid_record, std::string("malformed review record: ") + e.what());
  }
}

struct ReportParameters {
  int32_t topics = 5;
  int32_t words = 6;
  double min_prob = 0.02;
  double alpha = 10.0;
  double beta = 0.01;
  uint64_t seed = 1;
  int32_t iterations = 1000;

  friend bool operator==(const ReportParameters&, const ReportParameters&) = default;
};

struct StoredReport {
  std::string report_id;  // assigned by the store
  std::string company_slug;
  Timestamp created_at{};
  ReportParameters parameters;
  topics::TopicReport report;

  friend bool operator==(const StoredReport&, const StoredReport&) = default;
};

inline json parameters_to_json(const ReportParameters& p) {
  return json{{"topics", p.topics}, {"words", p.words}, {"min_prob", p.min_prob}, {"alpha", p.alpha},
              {"beta", p.beta},     {"seed", p.seed},   {"iterations", p.iterations}};
}

inline ReportParameters parameters_from_json(const json& j) {
  ReportParameters p;
  p.topics = j.at("topics").get<int32_t>();
  p.words = j.at("words").get<int32_t>();
  p.min_prob = j.at("min_prob").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.beta = j.at("beta").get<double>();
  p.seed = j.at("seed").get<uint64_t>();
  p.iterations = j.at("iterations").get<int32_t>();
  return p;
}

inline json topic_report_to_json(const topics::TopicReport& r) {
  json topics = json::array();
  for (size_t k = 0; k < r.topics.size(); ++k) {
    json terms = json::array();
    for (const auto& t : r.topics[k]) {
      terms.push_back(json{{"term", t.term}, {"term_id", t.term_id}, {"probability", t.probability}});
    }
    topics.push_back(json{{"topic", k}, {"terms", std::move(terms)}});
  }
  return topics;
}

inline topics::TopicReport topic_report_from_json(const json& j) {
  topics::TopicReport r;
  for (const auto& t : j) {
    auto& row = r.topics.emplace_back();
    for (const auto& e : t.at("terms")) {
      row.push_back(topics::TermWeight{e.at("term_id").get<int32_t>(), e.at("term").get<std::string>(),
                                       e.at("probability").get<double>()});
    }
  }
  return r;
}

// The reproducible part of a report: everything except storage metadata.
inline json report_payload_to_json(const StoredReport& r) {
  return json{{"company", r.company_slug},
              {"parameters", parameters_to_json(r.parameters)},
              {"topics", topic_report_to_json(r.report)}};
}

inline json stored_report_to_json(const StoredReport& r) {
  json j = report_payload_to_json(r);
  j["report_id"] = r.report_id;
  j["created_at"] = format_timestamp(r.created_at);
  return j;
}

inline StoredReport stored_report_from_json(const json& j) {
  try {
    StoredReport r;
    r.company_slug = j.at("company").get<std::string>();
    r.parameters = parameters_from_json(j.at("parameters"));
    r.report = topic_report_from_json(j.at("topics"));
    if (j.contains("report_id")) r.report_id = j.at("report_id").get<std::string>();
    if (j.contains("created_at")) r.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_record, std::string("malformed report record: ") + e.what());
  }
}

}  // namespace reputex
