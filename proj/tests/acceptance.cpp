// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"
#include "copilot/ingest/corpus.hpp"
#include "copilot/judge/judge.hpp"
#include "copilot/orchestrator/orchestrator.hpp"
#include "copilot/sql/dataset.hpp"
#include "copilot/sql/parser.hpp"
#include "copilot/sql/scoring.hpp"
#include "copilot/table/attribution.hpp"
#include "copilot/table/scoring.hpp"
#include "copilot/table/synthetic.hpp"
#include "support.hpp"

using namespace copilot;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw Failure{why};
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

char letter(table::FactorClass c) {
  switch (c) {
    case table::FactorClass::Contributor: return 'C';
    case table::FactorClass::Mitigator: return 'M';
    case table::FactorClass::NonInfluential: return 'N';
  }
  return '?';
}

std::string flip_direction(const std::string& text) {
  static const std::vector<std::pair<std::string, std::string>> swaps = {
      {"indicates a decrease", "indicates an increase"},
      {"indicates an increase", "indicates a decrease"},
      {"indicates no change", "indicates a decrease"}};
  for (const auto& [from, to] : swaps) {
    const auto pos = text.find(from);
    if (pos != std::string::npos) return text.substr(0, pos) + to + text.substr(pos + from.size());
  }
  return text;
}

void tabular_oracle() {
  const auto t0 = Clock::now();
  for (int s = -100; s <= 100; ++s) {
    require(letter(table::classify_factor(s)) == testsupport::oracle_factor_class(s),
            "score " + std::to_string(s) + " misclassified");
  }
  require(seconds_since(t0) < 1.0, "exhaustive check took over 1 s");
}

void worked_examples() {
  const auto row = table::example_row();
  require(table::parse_csv_rows(testsupport::kTable2Csv).at(0) == row, "Table 2 CSV does not parse to the example row");
  require(table::render_row(row, table::RowFormat::List) == testsupport::kTable2List, "list rendering differs");
  require(table::render_row(row, table::RowFormat::Text) == testsupport::kTable2Text, "text rendering differs");
  require(table::ground_truth_explanation(row).full_text == testsupport::kTable2Explanation,
          "Table 2 explanation differs");
  require(table::grade_explanation(row, testsupport::kTable2Explanation, true).correct,
          "Table 2 explanation not graded correct");
  const auto examples = sql::load_sql_dataset(testsupport::fixture("sql_eval.jsonl"));
  const auto& t1 = examples.at(0);
  require(t1.question == "How many heads of the departments are older than 56?" &&
              t1.context == "CREATE TABLE head (age INTEGER)" &&
              t1.answer == "SELECT COUNT(*) FROM head WHERE age > 56",
          "Table 1 record differs");
  require(sql::match_sql(t1.answer, t1.answer).matched(), "Table 1 query does not match itself");
  require(testsupport::oracle_tokens(t1.question).size() == ingest::count_tokens(t1.question) &&
              ingest::count_tokens(t1.question) == 11,
          "Table 1 question token count");
}

void tabular_round_trip() {
  const auto t0 = Clock::now();
  const auto rows = table::generate_synthetic_rows(1000, 20240101, true);
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(30);
  std::shuffle(order.begin(), order.end(), rng);
  const std::set<std::size_t> bad(order.begin(), order.begin() + 300);
  std::vector<table::ExplanationPair> exact, corrupted;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto text = table::ground_truth_explanation(rows[i]).full_text;
    exact.push_back({rows[i], text});
    corrupted.push_back({rows[i], bad.count(i) ? flip_direction(text) : text});
    require(!bad.count(i) || corrupted.back().candidate != text, "corruption did not change row text");
  }
  const auto a = table::score_explanations(exact);
  const auto b = table::score_explanations(corrupted);
  require(a.correct == 1000 && a.accuracy == 1.0, "oracle candidates scored " + testsupport::fmt2(a.accuracy));
  require(b.correct == 700 && b.accuracy == 0.7, "corrupted candidates scored " + std::to_string(b.accuracy));
  require(seconds_since(t0) < 10.0, "round trip took over 10 s");
}

void sql_calibration() {
  std::vector<sql::PredictionPair> pairs;
  std::size_t clean = 0;
  std::ifstream in(testsupport::fixture("sql_pairs_100.jsonl"));
  for (std::string line; std::getline(in, line);) {
    const auto j = json::parse(line);
    pairs.push_back({j.at("prediction"), j.at("reference")});
    clean += !j.at("corrupted").get<bool>();
  }
  require(pairs.size() == 100, "calibration fixture size");
  const auto strict = sql::score_predictions(pairs, false);
  require(strict.matches == clean && strict.accuracy == 0.64,
          "strict accuracy " + std::to_string(strict.accuracy) + " with " + std::to_string(clean) + " clean");

  const auto examples = sql::load_sql_dataset(testsupport::fixture("sql_eval.jsonl"));
  std::mt19937_64 rng(8);
  for (int set = 0; set < 200; ++set) {
    std::vector<sql::PredictionPair> ps;
    const std::size_t n = 1 + rng() % 50;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& ex = examples[rng() % examples.size()];
      std::string q = ex.answer;
      switch (rng() % 3) {
        case 0: q = text::to_lower(q); break;
        case 1: q += ";"; break;
        default: {
          const auto pos = q.find_last_of("0123456789");
          if (pos != std::string::npos) q[pos] = q[pos] == '9' ? '0' : static_cast<char>(q[pos] + 1);
        }
      }
      ps.push_back({q, ex.answer});
    }
    const auto s = sql::score_predictions(ps, false);
    const auto l = sql::score_predictions(ps, true);
    for (std::size_t i = 0; i < n; ++i) {
      require(!s.verdicts[i].matched() || l.verdicts[i].matched(), "strict match not lenient: " + ps[i].prediction);
    }
    require(l.accuracy >= s.accuracy, "lenient accuracy below strict");
  }
}

void sql_parser() {
  const auto t0 = Clock::now();
  const auto examples = sql::load_sql_dataset(testsupport::fixture("sql_eval.jsonl"));
  require(examples.size() >= 200, "fixture has fewer than 200 records");
  require(examples[0].answer == "SELECT COUNT(*) FROM head WHERE age > 56", "fixture does not start with Table 1");
  for (const auto& ex : examples) {
    const auto ast = sql::parse_sql(ex.answer);
    require(sql::parse_sql(sql::render_sql(ast)) == ast, "round trip changed " + ex.answer);
  }
  std::mt19937_64 rng(1234);
  static const std::vector<std::string> frags = {"SELECT", "FROM", "WHERE", "(",   ")",  ",",  "'",
                                                 "\"",     "*",    "AND",   "OR",  "IN", "--", "\xff"};
  for (int i = 0; i < 10000; ++i) {
    std::string input;
    if (i % 2 == 0) {
      const std::size_t n = rng() % 120;
      for (std::size_t j = 0; j < n; ++j) input.push_back(static_cast<char>(rng() % 256));
    } else {
      input = examples[rng() % examples.size()].answer;
      for (int e = 0; e < 3 && !input.empty(); ++e) {
        const std::size_t pos = rng() % input.size();
        if (rng() % 2) {
          input.erase(pos, 1 + rng() % 5);
        } else {
          input.insert(pos, frags[rng() % frags.size()]);
        }
      }
    }
    try {
      const auto ast = sql::parse_sql(input);
      require(sql::parse_sql(sql::render_sql(ast)) == ast, "fuzz round trip changed an accepted input");
    } catch (const sql::ParseError&) {
    } catch (const Failure&) {
      throw;
    } catch (const std::exception& e) {
      throw Failure{std::string("fuzz input raised a non-ParseError: ") + e.what()};
    }
  }
  require(seconds_since(t0) < 30.0, "parser checks took over 30 s");
}

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, bool coarse) {
  std::vector<float> v(dim);
  for (;;) {
    bool nonzero = false;
    for (auto& x : v) {
      x = coarse ? static_cast<float>(static_cast<int>(rng() % 5) - 2)
                 : std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng);
      nonzero = nonzero || x != 0.0f;
    }
    if (nonzero) return v;
  }
}

void retrieval() {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const bool coarse = trial % 2 == 0;
    const std::size_t dim = coarse ? 3 + rng() % 4 : 8 + rng() % 57;
    const std::size_t n = 1 + rng() % 1000;
    index::VectorIndex idx(static_cast<std::uint32_t>(dim), "prop");
    std::vector<std::pair<std::string, std::vector<float>>> records;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = random_vector(rng, dim, coarse);
      const std::string id = "c" + std::to_string(rng() % 100000) + "-" + std::to_string(i);
      idx.add({id, index::EmbeddingVector(v)});
      records.emplace_back(id, std::move(v));
    }
    const auto q = random_vector(rng, dim, coarse);
    const std::size_t k = 1 + rng() % 20;
    const auto got = idx.top_k(index::EmbeddingVector(q), k);
    const auto want = testsupport::oracle_top_k(records, q, k);
    require(got.size() == want.size(), "result size differs in trial " + std::to_string(trial));
    for (std::size_t i = 0; i < got.size(); ++i) {
      require(got[i].chunk_id == want[i].id && std::abs(got[i].score - want[i].score) < 1e-12,
              "ranking differs in trial " + std::to_string(trial));
    }
    const std::size_t self = rng() % n;
    const auto hit = idx.top_k(index::EmbeddingVector(records[self].second), 1);
    require(std::abs(hit[0].score - 1.0) < 1e-6, "record is not its own top hit");
  }
  testsupport::TempDir dir;
  index::VectorIndex idx(64, "mock-hash-64");
  for (int i = 0; i < 1000; ++i) idx.add({"doc-" + std::to_string(i) + "#0", index::EmbeddingVector(random_vector(rng, 64, false))});
  index::save_index(idx, dir.file("i.vidx"));
  const auto loaded = index::load_index(dir.file("i.vidx"));
  require(loaded.size() == idx.size() && loaded.provider_tag() == idx.provider_tag(), "loaded index header differs");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& a = loaded.records()[i].vector.components();
    const auto& b = idx.records()[i].vector.components();
    require(loaded.records()[i].chunk_id == idx.records()[i].chunk_id &&
                std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0,
            "record " + std::to_string(i) + " not bit-exact after load");
  }
}

void chunker() {
  const auto t0 = Clock::now();
  static const std::vector<std::string> pieces = {"alpha", "beta", "42", "x", ".", "!", "?", ",", "-",
                                                  "(", ")", "caf\xc3\xa9", "ROI", "3.5"};
  static const std::vector<std::string> gaps = {" ", " ", " ", "  ", "\n", "\n\n", "\t", "\n \n"};
  std::mt19937_64 rng(20240101);
  for (int d = 0; d < 1000; ++d) {
    std::string text;
    const int n = std::uniform_int_distribution<int>(1, 2500)(rng);
    for (int i = 0; i < n; ++i) {
      text += pieces[rng() % pieces.size()];
      text += gaps[rng() % gaps.size()];
    }
    const auto chunks = ingest::chunk_document(ingest::SourceDocument{"doc-x", "inline", text, 0}, 500);
    std::vector<std::string> joined;
    for (const auto& c : chunks) {
      require(c.token_count <= 500, "chunk over 500 tokens");
      for (auto& t : testsupport::oracle_tokens(c.text)) joined.push_back(t);
    }
    require(joined == testsupport::oracle_tokens(text), "chunks lose tokens in document " + std::to_string(d));
  }
  testsupport::TempDir dir;
  ingest::CorpusStore store(dir.file("corpus"));
  static const std::vector<std::string> vocab = {"attribution", "credit", "channel", "lead", "display", "search",
                                                 "budget", "roi", "campaign", "touch", "point", "model"};
  std::vector<ingest::Origin> origins;
  for (int d = 0; d < 316; ++d) {
    std::string text;
    for (int p = 0; p < 4; ++p) {
      if (p) text += "\n\n";
      for (int t = 0; t < 300; ++t) text += (t ? " " : "") + vocab[rng() % vocab.size()];
    }
    origins.push_back(ingest::Origin::text(text));
  }
  const auto stats = ingest::ingest_corpus(origins, store);
  require(stats.errors.empty() && stats.chunks == 1264, "corpus produced " + std::to_string(stats.chunks) + " chunks");
  const auto kb = qa::build_knowledge_base(store.chunks(), std::make_shared<index::MockEmbedder>(64));
  index::save_index(kb->index, dir.file("index.vidx"));
  require(index::load_index(dir.file("index.vidx")).size() == 1264, "saved index size");
  require(seconds_since(t0) < 60.0, "chunker checks took over 60 s");
}

std::string judge_reply(const std::array<int, 5>& s) {
  std::string out;
  for (std::size_t i = 0; i < 5; ++i) out += judge::display_name(judge::kCriteria[i]) + ": " + std::to_string(s[i]) + "\n";
  return out;
}

void judge_aggregation() {
  std::mt19937_64 rng(2024);
  auto run_matrix = [](std::size_t nq, std::size_t nc, const std::vector<std::array<int, 5>>& scores,
                       const std::vector<int>& bad, gateway::Gateway& gw) {
    gw.register_endpoint("judge", gateway::scripted_model({gateway::ScriptRule::dynamic(
                                      gateway::ScriptRule::Matcher::Any, "",
                                      [&](const gateway::CompletionRequest& r) {
                                        const std::string& p = r.messages.front().content;
                                        const auto at = p.find("Candidate answer:\ncell ") + 23;
                                        const std::size_t cell = std::stoul(p.substr(at, p.find(' ', at) - at));
                                        if (bad[cell]) return std::string("accuracy: great");
                                        return judge_reply(scores[cell]);
                                      })}));
    std::vector<judge::JudgeQuestion> qs;
    for (std::size_t i = 0; i < nq; ++i) qs.push_back({"q" + std::to_string(i), "question " + std::to_string(i), "ref"});
    std::vector<std::string> cands;
    for (std::size_t i = 0; i < nc; ++i) cands.push_back("cand" + std::to_string(i));
    return judge::run_judged_eval(qs, cands, "judge", gw, [nq](const std::string& c, const judge::JudgeQuestion& q) {
      return "cell " + std::to_string(std::stoul(c.substr(4)) * nq + std::stoul(q.id.substr(1))) + " end";
    });
  };
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t nq = 1 + rng() % 8, nc = 1 + rng() % 4;
    std::vector<std::array<int, 5>> scores;
    std::vector<int> bad;
    for (std::size_t i = 0; i < nq * nc; ++i) {
      std::array<int, 5> s{};
      for (auto& v : s) v = 1 + static_cast<int>(rng() % 5);
      scores.push_back(s);
      bad.push_back(i > 0 && rng() % 10 == 0);
    }
    gateway::Gateway gw;
    const auto report = run_matrix(nq, nc, scores, bad, gw);
    for (std::size_t ci = 0; ci < nc; ++ci) {
      long sums[5] = {0, 0, 0, 0, 0};
      long count = 0;
      for (std::size_t qi = 0; qi < nq; ++qi) {
        if (bad[ci * nq + qi]) continue;
        ++count;
        for (int k = 0; k < 5; ++k) sums[k] += scores[ci * nq + qi][k];
      }
      const auto& summary = report.candidates.at(ci);
      require(summary.included == static_cast<std::size_t>(count), "included count differs");
      for (int k = 0; count && k < 5; ++k) {
        require(testsupport::fmt2(summary.means.at(judge::kCriteria[k])) == testsupport::oracle_mean2(sums[k], count),
                "mean differs in trial " + std::to_string(trial));
      }
    }
  }
  testsupport::TempDir dir;
  const std::vector<std::array<int, 5>> scores = {{1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}, {2, 2, 2, 2, 2}, {3, 4, 5, 1, 2}};
  const std::vector<int> bad = {0, 0, 1, 0};
  std::string first;
  {
    gateway::Gateway gw(gateway::GatewayMode::Record, gateway::Transcript::open(dir.file("t.jsonl")));
    first = judge::format_report(run_matrix(2, 2, scores, bad, gw));
  }
  for (int run = 0; run < 2; ++run) {
    gateway::Gateway gw(gateway::GatewayMode::Replay, gateway::Transcript::open(dir.file("t.jsonl")));
    const std::vector<std::array<int, 5>> other(4, {1, 1, 1, 1, 1});
    const auto again = judge::format_report(run_matrix(2, 2, other, bad, gw));
    require(again == first, "replayed report differs");
    require(gw.backend_calls("judge") == 0, "replay called the judge backend");
  }
}

void end_to_end() {
  const auto t0 = Clock::now();
  testsupport::TempDir dir;
  gateway::Gateway gw;
  using gateway::ScriptRule;
  gw.register_endpoint("router", gateway::scripted_model({ScriptRule::substring("Message: How many", "SQL_QUERY"),
                                                          ScriptRule::fallback("DOC_QA")}));
  gw.register_endpoint("qa", gateway::scripted_model({ScriptRule::fallback("Attribution assigns credit to touch points.")}));
  gw.register_endpoint("sql", gateway::scripted_model({ScriptRule::fallback("SELECT COUNT(*) FROM head WHERE age > 56")}));
  orchestrator::SessionStore store(dir.str());
  std::vector<ingest::DocumentChunk> chunks;
  const auto doc = ingest::fetch_document(
      ingest::Origin::text(testsupport::slurp(testsupport::fixture("corpus/attribution.txt"))), "doc-00000");
  for (auto& c : ingest::chunk_document(doc, 60)) chunks.push_back(std::move(c));
  const auto kb = qa::build_knowledge_base(chunks, std::make_shared<index::MockEmbedder>());
  orchestrator::CopilotConfig cfg;
  cfg.router_endpoint = "router";
  cfg.qa_endpoint = "qa";
  cfg.sql_endpoint = "sql";
  cfg.sql_context = "CREATE TABLE head (age INTEGER)";
  orchestrator::Copilot copilot(gw, store, cfg, [&] { return kb; });
  const auto sid = store.create_session();
  using orchestrator::IntentKind;
  const std::vector<std::tuple<std::string, std::optional<std::string>, IntentKind>> turns = {
      {"What is multi-touch attribution?", std::nullopt, IntentKind::DocQa},
      {"How many heads of the departments are older than 56?", std::nullopt, IntentKind::SqlQuery},
      {"Explain this row", std::string(testsupport::kTable2Csv), IntentKind::TableExplain}};
  for (const auto& [text, csv, want] : turns) {
    const auto r = copilot.handle_turn(sid, text, csv);
    require(!r.error, "turn failed: " + (r.error ? r.error->message : ""));
    require(r.intent.kind == want, "intent for \"" + text + "\" was " + orchestrator::to_string(r.intent.kind));
    const auto trace = store.get_trace(r.trace_id);
    require(trace.steps().front().kind == orchestrator::StepKind::Intent &&
                trace.steps().back().kind == orchestrator::StepKind::Final,
            "trace is not INTENT ... FINAL");
    for (std::size_t i = 1; i < trace.steps().size(); ++i) {
      require(trace.steps()[i - 1].timestamp_us < trace.steps()[i].timestamp_us, "trace timestamps not increasing");
    }
    if (want == IntentKind::TableExplain) {
      require(r.answer.find(testsupport::kTable2Explanation) != std::string::npos, "table answer lacks oracle text");
    }
    if (want == IntentKind::SqlQuery) {
      require(r.answer.find("SELECT COUNT(*) FROM head WHERE age > 56") != std::string::npos, "sql answer lacks query");
    }
  }
  require(store.get_session(sid).turns.size() == 3, "session does not hold three turns");
  require(seconds_since(t0) < 5.0, "session took over 5 s");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"tabular-oracle-exhaustive", tabular_oracle},
      {"worked-examples", worked_examples},
      {"tabular-round-trip", tabular_round_trip},
      {"sql-scorer-calibration", sql_calibration},
      {"sql-parser-round-trip-and-fuzz", sql_parser},
      {"retrieval-exactness", retrieval},
      {"chunker-bounds-and-scale", chunker},
      {"judge-aggregation-and-replay", judge_aggregation},
      {"offline-end-to-end", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string why;
    try {
      check();
    } catch (const Failure& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    if (why.empty()) {
      std::cout << "PASS " << name << "\n";
    } else {
      std::cout << "FAIL " << name << ": " << why << "\n";
      ++failed;
    }
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
