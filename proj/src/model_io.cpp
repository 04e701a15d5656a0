#include "streamhar/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "streamhar/errors.hpp"

namespace streamhar {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json chain_to_json(const SymbolChain& chain) {
  return ordered_json{{"n_symbols", chain.n_symbols},
                      {"log_init", chain.log_init},
                      {"log_trans", chain.log_trans}};
}

SymbolChain chain_from_json(const ordered_json& j) {
  SymbolChain chain;
  chain.n_symbols = j.at("n_symbols").get<int>();
  chain.log_init = j.at("log_init").get<std::vector<double>>();
  chain.log_trans = j.at("log_trans").get<std::vector<double>>();
  return chain;
}

ordered_json hmm_to_json(const HmmParams& p) {
  return ordered_json{{"n_states", p.n_states},
                      {"n_symbols", p.n_symbols},
                      {"log_prior", p.log_prior},
                      {"log_transition", p.log_transition},
                      {"log_emission", p.log_emission}};
}

HmmParams hmm_from_json(const ordered_json& j) {
  HmmParams p;
  p.n_states = j.at("n_states").get<int>();
  p.n_symbols = j.at("n_symbols").get<int>();
  p.log_prior = j.at("log_prior").get<std::vector<double>>();
  p.log_transition = j.at("log_transition").get<std::vector<double>>();
  p.log_emission = j.at("log_emission").get<std::vector<double>>();
  return p;
}

ordered_json block_to_json(const ThetaBlock& b) {
  return ordered_json{{"n", b.n}, {"pi", b.pi}, {"trans", b.trans}};
}

ThetaBlock block_from_json(const ordered_json& j) {
  ThetaBlock b;
  b.n = j.at("n").get<int>();
  b.pi = j.at("pi").get<std::vector<double>>();
  b.trans = j.at("trans").get<std::vector<double>>();
  return b;
}

ordered_json chains_to_json(const std::vector<SymbolChain>& chains) {
  ordered_json arr = ordered_json::array();
  for (const SymbolChain& c : chains) arr.push_back(chain_to_json(c));
  return arr;
}

std::vector<SymbolChain> chains_from_json(const ordered_json& j) {
  std::vector<SymbolChain> out;
  for (const ordered_json& c : j) out.push_back(chain_from_json(c));
  return out;
}

std::vector<char> flags_from_json(const ordered_json& j) {
  std::vector<char> out;
  for (const ordered_json& v : j) out.push_back(v.get<int>() != 0 ? 1 : 0);
  return out;
}

ordered_json flags_to_json(const std::vector<char>& flags) {
  ordered_json arr = ordered_json::array();
  for (char f : flags) arr.push_back(f ? 1 : 0);
  return arr;
}

ordered_json pdf_to_json(const JointPdf& pdf) {
  return ordered_json{{"class_id", pdf.class_id},
                      {"tod_bins", pdf.tod_bins},
                      {"duration_bins", pdf.duration_bins},
                      {"sample_count", pdf.sample_count},
                      {"mass", pdf.mass},
                      {"dur_edges", pdf.dur_edges}};
}

JointPdf pdf_from_json(const ordered_json& j) {
  JointPdf pdf;
  pdf.class_id = j.at("class_id").get<int>();
  pdf.tod_bins = j.at("tod_bins").get<int>();
  pdf.duration_bins = j.at("duration_bins").get<int>();
  pdf.sample_count = j.at("sample_count").get<std::size_t>();
  pdf.mass = j.at("mass").get<std::vector<double>>();
  pdf.dur_edges = j.at("dur_edges").get<std::vector<double>>();
  return pdf;
}

ordered_json lls_to_json(const std::vector<double>& lls) {
  // JSON has no -inf literal; unmodeled classes serialize as null.
  ordered_json arr = ordered_json::array();
  for (double v : lls) {
    if (std::isfinite(v))
      arr.push_back(v);
    else
      arr.push_back(nullptr);
  }
  return arr;
}

}  // namespace

std::string model_to_json(const ModelDocument& doc) {
  const HhmmModel& m = doc.model;
  ordered_json alphabet = ordered_json::array();
  for (std::size_t i = 0; i < m.alphabet.size(); ++i) {
    const auto& sym = m.alphabet.symbol_at(static_cast<int>(i));
    alphabet.push_back(ordered_json::array({sym.first, sym.second}));
  }
  ordered_json classes = ordered_json::array();
  for (const ActivityClass& c : m.classes.classes()) classes.push_back(c.name);

  ordered_json bodies = ordered_json::array();
  for (const HmmParams& b : m.bodies) bodies.push_back(hmm_to_json(b));

  ordered_json j{
      {"format_version", kModelFormatVersion},
      {"alphabet", alphabet},
      {"classes", classes},
      {"beta", m.beta},
      {"kappa", m.kappa},
      {"has_model", flags_to_json(m.has_model)},
      {"dropped_classes", m.dropped_classes},
      {"bodies", bodies},
      {"begin",
       {{"beta", m.begin.beta},
        {"tau", m.begin.tau},
        {"class_chains", chains_to_json(m.begin.class_chains)},
        {"background", chain_to_json(m.begin.background)},
        {"has_model", flags_to_json(m.begin.has_model)}}},
      {"end",
       {{"beta", m.end.beta},
        {"tau", m.end.tau},
        {"end_chains", chains_to_json(m.end.end_chains)},
        {"continuation_chains", chains_to_json(m.end.continuation_chains)},
        {"has_model", flags_to_json(m.end.has_model)}}},
      {"theta",
       {{"root", block_to_json(m.theta.root)},
        {"x1", block_to_json(m.theta.x1)},
        {"x2", block_to_json(m.theta.x2)},
        {"x3", block_to_json(m.theta.x3)}}},
      {"correction",
       {{"alpha", doc.correction.alpha},
        {"tod_bins", doc.correction.tod_bins},
        {"duration_bins", doc.correction.duration_bins},
        {"smoothing", doc.correction.smoothing}}},
  };
  ordered_json pdfs = ordered_json::array();
  for (const JointPdf& p : doc.pdfs) pdfs.push_back(pdf_to_json(p));
  j["pdfs"] = std::move(pdfs);
  return j.dump(2) + "\n";
}

ModelDocument model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_failure, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      raise(Errc::io_failure, "unsupported model format version " + std::to_string(version));

    ModelDocument doc;
    HhmmModel& m = doc.model;

    std::vector<std::pair<std::string, std::string>> symbols;
    for (const ordered_json& s : j.at("alphabet"))
      symbols.emplace_back(s.at(0).get<std::string>(), s.at(1).get<std::string>());
    m.alphabet = ObservationAlphabet(std::move(symbols));
    m.classes = ClassRegistry::from_names(j.at("classes").get<std::vector<std::string>>());

    m.beta = j.at("beta").get<int>();
    m.kappa = j.at("kappa").get<double>();
    m.has_model = flags_from_json(j.at("has_model"));
    m.dropped_classes = j.at("dropped_classes").get<std::vector<std::string>>();
    for (const ordered_json& b : j.at("bodies")) m.bodies.push_back(hmm_from_json(b));

    const ordered_json& jb = j.at("begin");
    m.begin.beta = jb.at("beta").get<int>();
    m.begin.tau = jb.at("tau").get<double>();
    m.begin.class_chains = chains_from_json(jb.at("class_chains"));
    m.begin.background = chain_from_json(jb.at("background"));
    m.begin.has_model = flags_from_json(jb.at("has_model"));

    const ordered_json& je = j.at("end");
    m.end.beta = je.at("beta").get<int>();
    m.end.tau = je.at("tau").get<double>();
    m.end.end_chains = chains_from_json(je.at("end_chains"));
    m.end.continuation_chains = chains_from_json(je.at("continuation_chains"));
    m.end.has_model = flags_from_json(je.at("has_model"));

    const ordered_json& jt = j.at("theta");
    m.theta.root = block_from_json(jt.at("root"));
    m.theta.x1 = block_from_json(jt.at("x1"));
    m.theta.x2 = block_from_json(jt.at("x2"));
    m.theta.x3 = block_from_json(jt.at("x3"));

    const ordered_json& jc = j.at("correction");
    doc.correction.alpha = jc.at("alpha").get<double>();
    doc.correction.tod_bins = jc.at("tod_bins").get<int>();
    doc.correction.duration_bins = jc.at("duration_bins").get<int>();
    doc.correction.smoothing = jc.at("smoothing").get<double>();

    for (const ordered_json& p : j.at("pdfs")) doc.pdfs.push_back(pdf_from_json(p));
    return doc;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::io_failure, std::string("model document is malformed: ") + e.what());
  }
}

void save_model(const ModelDocument& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot open " + path + " for writing");
  out << model_to_json(doc);
  if (!out) raise(Errc::io_failure, "failed writing " + path);
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string segment_to_json(const Segment& segment, const ClassRegistry& classes) {
  ordered_json j{
      {"begin_index", segment.begin_index},
      {"end_index", segment.end_index},
      {"begin_timestamp", format_timestamp(segment.begin_ts)},
      {"end_timestamp", format_timestamp(segment.end_ts)},
      {"raw_label", segment.raw_label},
      {"corrected_label",
       segment.corrected_label ? ordered_json(*segment.corrected_label) : ordered_json(nullptr)},
      {"label_name", classes.at(segment.label()).name},
      {"duration_s", segment.duration_s()},
      {"truncated", segment.truncated},
      {"parent_begin",
       segment.parent_begin ? ordered_json(*segment.parent_begin) : ordered_json(nullptr)},
  };
  return j.dump();
}

std::string output_to_jsonl(const EngineOutput& output, const ClassRegistry& classes) {
  ordered_json j;
  switch (output.kind) {
    case OutputKind::begin:
      j["type"] = "begin";
      break;
    case OutputKind::ongoing:
      j["type"] = "ongoing";
      break;
    case OutputKind::interrupt_begin:
      j["type"] = "interrupt_begin";
      break;
    case OutputKind::resume:
      j["type"] = "resume";
      break;
    case OutputKind::segment:
      j["type"] = "segment";
      break;
  }
  j["event_index"] = output.event_index;
  j["timestamp"] = format_timestamp(output.timestamp);
  if (output.estimate) {
    j["argmax"] = output.estimate->argmax;
    j["class"] = classes.at(output.estimate->argmax).name;
    j["log_likelihoods"] = lls_to_json(output.estimate->log_likelihoods);
  }
  if (output.resumed_begin) j["resumed_begin"] = *output.resumed_begin;
  if (output.segment) j["segment"] = ordered_json::parse(segment_to_json(*output.segment, classes));
  return j.dump();
}

}  // namespace streamhar
