#pragma once

// Deterministic synthetic review platform: generates companies' reviews,
// renders them as paginated listing pages in the canonical markup and serves
// them over HTTP. It is the ground truth for crawler and pipeline tests.

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "reputex/domain.hpp"
#include "reputex/error.hpp"
#include "reputex/html.hpp"

namespace reputex::fixture {

struct CompanySpec {
  std::string slug;
  std::string name;
  std::string sector;
  int64_t review_count = 0;
  double praise_fraction = 0.5;
};

inline std::vector<std::string> default_praise_phrases() {
  return {
      "Entrega rápida, produto excelente!",
      "Preço bom e frete grátis.",
      "Comprei e gostei, loja excelente.",
      "O produto chegou antes do prazo.",
      "Site fácil de usar, parabéns pela facilidade na compra.",
      "Ótimo preço, sempre compro nessa loja.",
      "Bom desconto no livro, ótima opção.",
      "Marca de confiança, produto original.",
      "Boa compra com desconto no frete.",
      "Entrega dentro do prazo e produto bom.",
      "Compra fácil e pagamento seguro.",
      "Gostei do atendimento e da entrega.",
  };
}

inline std::vector<std::string> default_complaint_phrases() {
  return {
      "Produto chegou com atraso, entrega fora do prazo.",
      "Tive problema com o site na hora da compra.",
      "Frete caro e entrega demorada.",
      "Produto veio com defeito e a troca é difícil.",
      "Atendimento ruim, não resolveram o problema.",
      "Cobrança errada no cartão de crédito.",
      "Pedido cancelado sem aviso prévio.",
      "Embalagem danificada e produto quebrado.",
      "Prazo de entrega não foi cumprido.",
      "Estorno do pagamento ainda não aconteceu.",
  };
}

struct FixtureSpec {
  std::vector<CompanySpec> companies;
  int64_t page_size = 25;
  uint64_t seed = 1;
  std::vector<std::string> praise_phrases = default_praise_phrases();
  std::vector<std::string> complaint_phrases = default_complaint_phrases();

  void validate() const {
    if (page_size < 1) throw Error(Errc::invalid_argument, "page_size must be >= 1");
    if (praise_phrases.empty() || complaint_phrases.empty())
      throw Error(Errc::invalid_argument, "phrase banks must not be empty");
    std::set<std::string> slugs;
    for (const auto& c : companies) {
      if (!is_valid_slug(c.slug)) throw Error(Errc::invalid_argument, "invalid slug: '" + c.slug + "'");
      if (!slugs.insert(c.slug).second) throw Error(Errc::invalid_argument, "duplicate slug: '" + c.slug + "'");
      if (c.review_count < 0) throw Error(Errc::invalid_argument, "review_count must be >= 0");
      if (!(c.praise_fraction >= 0.0 && c.praise_fraction <= 1.0))
        throw Error(Errc::invalid_argument, "praise_fraction must be in [0, 1]");
    }
  }
};

// {"seed": 1, "page_size": 25, "companies": [{"slug": ..., "name": ...,
//   "sector": ..., "review_count": ..., "praise_fraction": ...}]}
inline FixtureSpec fixture_spec_from_json(const nlohmann::json& j) {
  try {
    FixtureSpec spec;
    spec.seed = j.value("seed", uint64_t{1});
    spec.page_size = j.value("page_size", int64_t{25});
    for (const auto& c : j.at("companies")) {
      CompanySpec cs;
      cs.slug = c.at("slug").get<std::string>();
      cs.name = c.value("name", cs.slug);
      cs.sector = c.value("sector", std::string{});
      cs.review_count = c.at("review_count").get<int64_t>();
      cs.praise_fraction = c.value("praise_fraction", 0.5);
      spec.companies.push_back(std::move(cs));
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("malformed fixture spec: ") + e.what());
  }
}

struct FixtureReview {
  std::string description;
  ReviewClassification classification = ReviewClassification::Praise;
  Date posted_date{};
  int64_t page = 1;
};

struct CompanyFixture {
  Company company;
  std::vector<FixtureReview> reviews;  // listing order
  std::vector<std::string> pages;      // rendered HTML, index 0 is page 1
};

inline std::string listing_path(std::string_view slug, int64_t page) {
  return "/company/" + std::string(slug) + "/reviews?page=" + std::to_string(page);
}

// The newest generated review is dated on this day; older ones step back.
inline constexpr Date kFixtureEpoch{std::chrono::year{2018}, std::chrono::month{3}, std::chrono::day{5}};
inline constexpr int64_t kReviewsPerDay = 3;

class FixtureSite {
 public:
  FixtureSite() = default;
  explicit FixtureSite(std::map<std::string, CompanyFixture> companies) : companies_(std::move(companies)) {}

  const std::map<std::string, CompanyFixture>& companies() const { return companies_; }

  const CompanyFixture& company(const std::string& slug) const {
    const auto it = companies_.find(slug);
    if (it == companies_.end()) throw Error(Errc::unknown_company, "fixture has no company '" + slug + "'");
    return it->second;
  }

  int64_t page_count(const std::string& slug) const { return static_cast<int64_t>(company(slug).pages.size()); }

  // 1-based; nullptr when out of range or unknown.
  const std::string* page(const std::string& slug, int64_t n) const {
    const auto it = companies_.find(slug);
    if (it == companies_.end() || n < 1 || n > static_cast<int64_t>(it->second.pages.size())) return nullptr;
    return &it->second.pages[static_cast<size_t>(n - 1)];
  }

  // Ground truth as the crawler should reconstruct it from `base_url`
  // (fetched_at is left at the epoch).
  std::vector<Review> expected_reviews(const std::string& slug, std::string_view base_url) const {
    std::string base(base_url);
    while (!base.empty() && base.back() == '/') base.pop_back();
    std::vector<Review> out;
    for (const auto& fr : company(slug).reviews) {
      out.push_back(Review{slug, fr.description, fr.classification, fr.posted_date,
                           base + listing_path(slug, fr.page), Timestamp{}});
    }
    return out;
  }

 private:
  std::map<std::string, CompanyFixture> companies_;
};

namespace detail {

inline uint64_t pick(std::mt19937_64& rng, uint64_t n) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::min(static_cast<uint64_t>(u * static_cast<double>(n)), n - 1);
}

inline std::string compose(std::mt19937_64& rng, const std::vector<std::string>& bank, const std::string& name) {
  std::string text = bank[pick(rng, bank.size())];
  if (bank.size() > 1 && pick(rng, 2) == 0) {
    std::string second;
    do {
      second = bank[pick(rng, bank.size())];
    } while (second == text);
    text += " " + second;
  }
  switch (pick(rng, 4)) {
    case 0: text += " Recomendo a " + name + "."; break;
    case 1: text += " Já comprei outras vezes na " + name + "."; break;
    default: break;
  }
  return text;
}

inline std::string render_page(const Company& company, std::span<const FixtureReview> items, int64_t page,
                               bool has_next) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"pt-BR\">\n<head><meta charset=\"utf-8\"><title>";
  out += html::escape(company.name);
  out += " - Avaliações</title></head>\n<body>\n<h1 class=\"company-name\">";
  out += html::escape(company.name);
  out += "</h1>\n<ul class=\"review-list\">\n";
  for (const auto& r : items) {
    out += "  <li class=\"review-item\">\n    <p class=\"review-text\">";
    out += html::escape(r.description);
    out += "</p>\n    <span class=\"review-kind\">";
    out += platform_label(r.classification);
    out += "</span>\n    <span class=\"review-date\">";
    out += format_date_br(r.posted_date);
    out += "</span>\n  </li>\n";
  }
  out += "</ul>\n<nav class=\"pager\">";
  if (has_next) {
    out += "<a rel=\"next\" href=\"";
    out += html::escape(listing_path(company.slug, page + 1));
    out += "\">Próxima</a>";
  }
  out += "</nav>\n</body>\n</html>\n";
  return out;
}

}  // namespace detail

// Deterministic in (spec, seed). Exactly round(review_count * praise_fraction)
// reviews are praise, placed by a seeded shuffle. Dates step back one day
// every kReviewsPerDay reviews from kFixtureEpoch, and (text, date, kind)
// triples are unique so every review survives deduplication.
inline FixtureSite generate_site(const FixtureSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::map<std::string, CompanyFixture> out;
  for (const auto& cs : spec.companies) {
    CompanyFixture cf;
    cf.company = Company{cs.slug, cs.name.empty() ? cs.slug : cs.name, cs.sector};
    const auto n = cs.review_count;
    const auto praise = static_cast<int64_t>(std::llround(static_cast<double>(n) * cs.praise_fraction));
    std::vector<ReviewClassification> kinds(static_cast<size_t>(n), ReviewClassification::Complaint);
    std::fill_n(kinds.begin(), praise, ReviewClassification::Praise);
    for (size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[detail::pick(rng, i)]);

    std::set<std::tuple<std::string, int, ReviewClassification>> seen;
    for (int64_t i = 0; i < n; ++i) {
      FixtureReview fr;
      fr.classification = kinds[static_cast<size_t>(i)];
      fr.posted_date = Date{std::chrono::sys_days{kFixtureEpoch} - std::chrono::days{i / kReviewsPerDay}};
      fr.page = i / spec.page_size + 1;
      const auto& bank = fr.classification == ReviewClassification::Praise ? spec.praise_phrases
                                                                           : spec.complaint_phrases;
      const int day = static_cast<int>(std::chrono::sys_days{fr.posted_date}.time_since_epoch().count());
      for (int attempt = 0;; ++attempt) {
        fr.description = detail::compose(rng, bank, cf.company.name);
        if (attempt >= 64) fr.description += " (" + std::to_string(i) + ")";
        if (seen.emplace(normalize_description(fr.description), day, fr.classification).second) break;
      }
      cf.reviews.push_back(std::move(fr));
    }

    const int64_t pages = std::max<int64_t>(1, (n + spec.page_size - 1) / spec.page_size);
    for (int64_t p = 1; p <= pages; ++p) {
      const auto begin = std::min<int64_t>((p - 1) * spec.page_size, n);
      const auto end = std::min<int64_t>(p * spec.page_size, n);
      cf.pages.push_back(detail::render_page(
          cf.company, std::span<const FixtureReview>(cf.reviews).subspan(static_cast<size_t>(begin),
                                                                         static_cast<size_t>(end - begin)),
          p, p < pages));
    }
    out.emplace(cs.slug, std::move(cf));
  }
  return FixtureSite(std::move(out));
}

// Serves `GET /company/<slug>/reviews?page=N` from a generated site. Paths
// registered with set_fault answer with a fixed status instead.
class FixtureServer {
 public:
  explicit FixtureServer(FixtureSite site) : site_(std::move(site)) {
    server_.Get(".*", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
  }

  ~FixtureServer() { stop(); }

  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  void set_fault(const std::string& path, int status) {
    std::lock_guard lock(mutex_);
    faults_[path] = status;
  }

  // Port 0 picks a free port. Throws bind_error.
  void start(int port = 0, const std::string& host = "127.0.0.1") {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound <= 0) throw Error(Errc::bind_error, "cannot bind " + host + ":" + std::to_string(port));
    port_ = bound;
    host_ = host;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  // Blocks the calling thread serving requests until stop().
  void run(int port, const std::string& host = "0.0.0.0") {
    if (!server_.bind_to_port(host, port)) throw Error(Errc::bind_error, "cannot bind " + host + ":" + std::to_string(port));
    port_ = port;
    host_ = host;
    server_.listen_after_bind();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  const FixtureSite& site() const { return site_; }

  int64_t requests_served() const { return requests_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    {
      std::lock_guard lock(mutex_);
      if (const auto it = faults_.find(req.path); it != faults_.end()) {
        res.status = it->second;
        res.set_content("fault", "text/plain");
        return;
      }
    }
    static const std::string prefix = "/company/";
    static const std::string suffix = "/reviews";
    const std::string& path = req.path;
    if (path.starts_with(prefix) && path.ends_with(suffix) && path.size() > prefix.size() + suffix.size()) {
      const std::string slug = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
      int64_t page = 1;
      bool ok = true;
      if (req.has_param("page")) {
        const std::string p = req.get_param_value("page");
        ok = !p.empty() && p.size() < 10 && p.find_first_not_of("0123456789") == std::string::npos;
        page = ok ? std::stoll(p) : 0;
      }
      if (ok) {
        if (const std::string* body = site_.page(slug, page)) {
          res.status = 200;
          res.set_content(*body, "text/html; charset=utf-8");
          return;
        }
      }
    }
    res.status = 404;
    res.set_content("not found", "text/plain");
  }

  FixtureSite site_;
  httplib::Server server_;
  std::thread thread_;
  std::mutex mutex_;
  std::map<std::string, int> faults_;
  std::atomic<int64_t> requests_{0};
  int port_ = 0;
  std::string host_;
};

inline std::unique_ptr<FixtureServer> serve_fixture(FixtureSite site, int port = 0) {
  auto server = std::make_unique<FixtureServer>(std::move(site));
  server->start(port);
  return server;
}

}  // namespace reputex::fixture
