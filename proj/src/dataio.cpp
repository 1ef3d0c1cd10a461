#include "dszog/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dszog/random.hpp"

namespace dszog {

namespace {

struct Entry {
  Index row;
  Index col;  // 0-based
  double value;
};

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_blank(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_label(std::string_view tok, std::size_t line_no) {
  if (tok == "-1" || tok == "0") return -1.0;
  if (tok == "+1" || tok == "1" || tok == "2") return 1.0;
  throw ParseError(line_no, "unrecognized label '" + std::string(tok) + "'");
}

double parse_value(std::string_view tok, std::size_t line_no) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError(line_no, "bad value '" + std::string(tok) + "'");
  if (!std::isfinite(v)) throw ParseError(line_no, "nonfinite value");
  return v;
}

Index parse_index(std::string_view tok, std::size_t line_no) {
  long long idx = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    throw ParseError(line_no, "bad index '" + std::string(tok) + "'");
  if (idx <= 0) throw ParseError(line_no, "indices are 1-based, got " + std::string(tok));
  return static_cast<Index>(idx);
}

}  // namespace

Dataset parse_sparse_dataset(const std::string& text, std::optional<Index> expect_dim) {
  if (expect_dim && *expect_dim < 0) throw ConfigError("expect_dim", "must be nonnegative");
  std::vector<Entry> entries;
  std::vector<double> labels;
  Index max_index = 0;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<Index> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto toks = tokens(raw);
    if (toks.empty() || toks.front().front() == '#') continue;
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(parse_label(toks.front(), line_no));
    seen.clear();
    for (std::size_t t = 1; t < toks.size(); ++t) {
      const auto colon = toks[t].find(':');
      if (colon == std::string_view::npos)
        throw ParseError(line_no, "expected index:value, got '" + std::string(toks[t]) + "'");
      const Index idx = parse_index(toks[t].substr(0, colon), line_no);
      const double value = parse_value(toks[t].substr(colon + 1), line_no);
      if (expect_dim && idx > *expect_dim)
        throw ParseError(line_no, "index " + std::to_string(idx) + " exceeds dimension " +
                                      std::to_string(*expect_dim));
      if (std::find(seen.begin(), seen.end(), idx) != seen.end())
        throw ParseError(line_no, "index " + std::to_string(idx) + " repeated");
      seen.push_back(idx);
      max_index = std::max(max_index, idx);
      entries.push_back({row, idx - 1, value});
    }
  }

  const Index d = expect_dim ? *expect_dim : max_index;
  Dataset out;
  out.features = RowMatrix::Zero(static_cast<Index>(labels.size()), d);
  out.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  for (const Entry& e : entries) out.features(e.row, e.col) = e.value;
  return out;
}

Dataset read_sparse_dataset(const std::filesystem::path& path, std::optional<Index> expect_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error(path.string() + ": read failed");
  try {
    return parse_sparse_dataset(buf.str(), expect_dim);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + std::string(e.what()).substr(
                                                          std::string(e.what()).find(": ") + 2));
  }
}

Dataset subsample(const Dataset& data, Index n_keep, bool stratified, std::uint64_t seed) {
  const Index n = data.rows();
  if (n_keep < 0) throw DataError("subsample: n_keep must be nonnegative");
  if (n_keep > n)
    throw DataError("subsample: n_keep " + std::to_string(n_keep) + " exceeds " + std::to_string(n) +
                    " rows");
  Rng rng = make_stream(seed, 0x5ab);
  std::vector<Index> keep;
  if (!stratified) {
    keep = sample_without_replacement(n, n_keep, rng);
  } else {
    std::vector<Index> pos, neg;
    for (Index i = 0; i < n; ++i) (data.labels[i] > 0 ? pos : neg).push_back(i);
    const double share_pos = n == 0 ? 0.0 : static_cast<double>(n_keep) * pos.size() / n;
    const double share_neg = n == 0 ? 0.0 : static_cast<double>(n_keep) * neg.size() / n;
    Index k_pos = static_cast<Index>(std::floor(share_pos));
    Index k_neg = static_cast<Index>(std::floor(share_neg));
    // Largest remainder; ties go to the positive class.
    while (k_pos + k_neg < n_keep) {
      const double r_pos = share_pos - k_pos, r_neg = share_neg - k_neg;
      if (r_pos >= r_neg && k_pos < static_cast<Index>(pos.size())) ++k_pos;
      else ++k_neg;
    }
    for (Index j : sample_without_replacement(static_cast<Index>(pos.size()), k_pos, rng))
      keep.push_back(pos[static_cast<std::size_t>(j)]);
    for (Index j : sample_without_replacement(static_cast<Index>(neg.size()), k_neg, rng))
      keep.push_back(neg[static_cast<std::size_t>(j)]);
    std::sort(keep.begin(), keep.end());
  }
  return data.select(keep);
}

// ---------------------------------------------------------------------------

namespace {

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(le, 8);
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

}  // namespace

std::uint64_t dataset_checksum(const Dataset& data) {
  Fnv1a h;
  h.u64(static_cast<std::uint64_t>(data.rows()));
  h.u64(static_cast<std::uint64_t>(data.dim()));
  for (Index i = 0; i < data.rows(); ++i)
    for (Index j = 0; j < data.dim(); ++j) h.f64(data.features(i, j));
  for (Index i = 0; i < data.labels.size(); ++i) h.f64(data.labels[i]);
  if (data.sensitive) {
    const RowMatrix& z = *data.sensitive;
    for (Index i = 0; i < z.rows(); ++i)
      for (Index j = 0; j < z.cols(); ++j) h.f64(z(i, j));
  }
  return h.value();
}

std::string checksum_hex(std::uint64_t checksum) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum));
  return buf;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string trace_header(const std::vector<std::string>& extra_names) {
  std::string h = "iter,wall_s,obj,penalty,max_viol,sumsq_viol,step_w,ema_w,ema_p";
  for (const auto& name : extra_names) h += "," + name;
  return h;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << content;
  out.close();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string key_values_text(const KeyValues& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

}  // namespace

void write_run(const RunRecord& record, const StationarityReport& report, const KeyValues& manifest,
               const std::filesystem::path& out_dir, const KeyValues& report_extra) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error(out_dir.string() + ": " + ec.message());

  std::string trace = trace_header(record.extra_names()) + "\n";
  for (const RunRow& r : record.rows()) {
    trace += std::to_string(r.iter);
    for (double x : {r.wall_s, r.objective, r.penalty, r.max_violation, r.sum_sq_violation,
                     r.step_norm_w, r.ema_norm_w, r.ema_norm_p})
      trace += "," + format_number(x);
    for (double x : r.extra) trace += "," + format_number(x);
    trace += "\n";
  }
  write_file(out_dir / "trace.csv", trace);

  KeyValues rep = report_entries(report);
  rep.insert(rep.end(), report_extra.begin(), report_extra.end());
  write_file(out_dir / "report.txt", key_values_text(rep));
  write_file(out_dir / "manifest.txt", key_values_text(manifest));
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, path.string() + ": expected key=value");
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

}  // namespace dszog
