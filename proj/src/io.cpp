#include "impact/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace impact::io {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

class CsvReader {
 public:
  CsvReader(const fs::path& path, const std::vector<std::vector<std::string>>& headers) : path_(path), in_(path) {
    if (!in_) throw DataError(path.string() + ": cannot open file");
    std::string line;
    if (!std::getline(in_, line)) throw DataError(where(path, 1) + "missing header");
    line_ = 1;
    const auto got = split(chomp(line));
    for (std::size_t i = 0; i < headers.size(); ++i)
      if (got == headers[i]) {
        variant_ = i;
        return;
      }
    std::string expected;
    for (const auto& h : headers) {
      std::string joined;
      for (const auto& f : h) joined += (joined.empty() ? "" : ",") + f;
      expected += (expected.empty() ? "" : " or ") + joined;
    }
    throw DataError(where(path, 1) + "header mismatch, expected " + expected);
  }

  std::size_t variant() const { return variant_; }
  std::size_t line() const { return line_; }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      line = chomp(line);
      if (line.empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }

  double number(const std::string& field, const char* name) const {
    double v = 0.0;
    const char* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || field.empty())
      throw DataError(where(path_, line_) + "malformed " + name + " '" + field + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw DataError(where(path_, line_) + what); }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t variant_ = 0;
  std::size_t line_ = 0;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError(path.string() + ": write failed");
}

Eigen::ArrayXd to_array(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

std::optional<PriceSeries> TradeSeries::price() const {
  if (!mid) return std::nullopt;
  return PriceSeries{*mid, mid->size() > 0 ? (*mid)[0] : 0.0};
}

bool operator==(const TradeSeries& a, const TradeSeries& b) {
  auto same = [](const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) {
    return x.size() == y.size() && (x.size() == 0 || std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0);
  };
  if (a.mid.has_value() != b.mid.has_value()) return false;
  return same(a.signs, b.signs) && same(a.volumes, b.volumes) && same(a.spreads, b.spreads) &&
         (!a.mid || same(*a.mid, *b.mid));
}

TradeSeries read_trades_csv(const fs::path& path) {
  CsvReader csv(path, {{"n", "sign", "volume", "spread"}, {"n", "sign", "volume", "spread", "mid"}});
  const bool has_mid = csv.variant() == 1;
  const std::size_t width = has_mid ? 5 : 4;
  std::vector<double> sign, vol, spread, mid;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != width)
      csv.fail("expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    const double n = csv.number(f[0], "n");
    if (n != static_cast<double>(sign.size())) csv.fail("trade index " + f[0] + " out of sequence");
    const double s = csv.number(f[1], "sign");
    if (s != 1.0 && s != -1.0) csv.fail("sign must be -1 or +1, found " + f[1]);
    const double v = csv.number(f[2], "volume");
    if (!(v > 0.0) || !std::isfinite(v)) csv.fail("volume must be positive, found " + f[2]);
    const double sp = csv.number(f[3], "spread");
    if (!(sp > 0.0) || !std::isfinite(sp)) csv.fail("spread must be positive, found " + f[3]);
    sign.push_back(s);
    vol.push_back(v);
    spread.push_back(sp);
    if (has_mid) {
      const double m = csv.number(f[4], "mid");
      if (!std::isfinite(m)) csv.fail("mid must be finite");
      mid.push_back(m);
    }
  }
  if (sign.empty()) throw DataError(path.string() + ": no trades");
  TradeSeries t{to_array(sign), to_array(vol), to_array(spread), std::nullopt};
  if (has_mid) t.mid = to_array(mid);
  return t;
}

void write_trades_csv(const fs::path& path, const TradeSeries& t) {
  auto out = open_out(path);
  out << (t.mid ? "n,sign,volume,spread,mid\n" : "n,sign,volume,spread\n");
  for (Index i = 0; i < t.size(); ++i) {
    out << i << ',' << (t.signs[i] > 0 ? "1" : "-1") << ',' << format_double(t.volumes[i]) << ','
        << format_double(t.spreads[i]);
    if (t.mid) out << ',' << format_double((*t.mid)[i]);
    out << '\n';
  }
  finish(out, path);
}

namespace {

constexpr std::array<char, 8> kMagic{'I', 'M', 'P', 'T', 'R', 'A', 'D', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary container assumes a little-endian host");

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const fs::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError(path.string() + ": truncated container");
  return v;
}

}  // namespace

void write_trades_binary(const fs::path& path, const TradeSeries& t) {
  auto out = open_out(path);
  out.write(kMagic.data(), kMagic.size());
  put(out, kFormatVersion);
  put(out, static_cast<std::uint32_t>(t.mid ? 0xF : 0x7));
  put(out, static_cast<std::uint64_t>(t.size()));
  auto column = [&](const Eigen::ArrayXd& c) {
    out.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(sizeof(double) * c.size()));
  };
  column(t.signs);
  column(t.volumes);
  column(t.spreads);
  if (t.mid) column(*t.mid);
  finish(out, path);
}

TradeSeries read_trades_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw DataError(path.string() + ": not a trade container");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw DataError(path.string() + ": unsupported container version " + std::to_string(version));
  const auto mask = get<std::uint32_t>(in, path);
  if (mask != 0x7 && mask != 0xF) throw DataError(path.string() + ": bad column mask");
  const auto n = static_cast<Index>(get<std::uint64_t>(in, path));
  auto column = [&]() {
    Eigen::ArrayXd c(n);
    if (!in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(sizeof(double) * n)))
      throw DataError(path.string() + ": truncated container");
    return c;
  };
  TradeSeries t;
  t.signs = column();
  t.volumes = column();
  t.spreads = column();
  if (mask == 0xF) t.mid = column();
  if (!((t.signs == 1.0) || (t.signs == -1.0)).all()) throw DataError(path.string() + ": sign column not +/-1");
  if (!(t.volumes > 0.0).all() || !(t.spreads > 0.0).all())
    throw DataError(path.string() + ": nonpositive volume or spread");
  return t;
}

TradeSeries read_trades(const fs::path& path) {
  if (path.extension() == ".bin") return read_trades_binary(path);
  return read_trades_csv(path);
}

void write_lag_curve_csv(const fs::path& path, const LagCurve& c, Index lo) {
  auto out = open_out(path);
  out << "lag,value,count,stderr\n";
  for (Index l = std::max<Index>(lo, 0); l <= c.max_lag(); ++l)
    out << l << ',' << format_double(c.values[l]) << ',' << c.counts[l] << ',' << format_double(c.std_error[l])
        << '\n';
  finish(out, path);
}

LagCurve read_lag_curve_csv(const fs::path& path) {
  CsvReader csv(path, {{"lag", "value", "count", "stderr"}});
  std::vector<std::array<double, 4>> rows;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 4) csv.fail("expected 4 fields");
    rows.push_back({csv.number(f[0], "lag"), csv.number(f[1], "value"), csv.number(f[2], "count"),
                    csv.number(f[3], "stderr")});
    const double lag = rows.back()[0];
    if (lag < 0 || lag != std::floor(lag)) csv.fail("lag must be a nonnegative integer");
    if (rows.size() > 1 && lag <= rows[rows.size() - 2][0]) csv.fail("lags must increase");
  }
  if (rows.empty()) throw DataError(path.string() + ": empty curve");
  LagCurve c(static_cast<Index>(rows.back()[0]));
  for (const auto& r : rows) {
    const auto l = static_cast<Index>(r[0]);
    c.values[l] = r[1];
    c.counts[l] = static_cast<std::int64_t>(r[2]);
    c.std_error[l] = r[3];
  }
  return c;
}

void write_kernel_csv(const fs::path& path, const Kernel& k) {
  auto out = open_out(path);
  out << "lag,g\n";
  for (Index l = 1; l <= k.truncation(); ++l) out << l << ',' << format_double(k.g[l - 1]) << '\n';
  if (k.tail != 0.0) out << "0," << format_double(k.tail) << '\n';
  finish(out, path);
}

Kernel read_kernel_csv(const fs::path& path) {
  CsvReader csv(path, {{"lag", "g"}});
  std::vector<double> g;
  double tail = 0.0;
  bool tail_seen = false;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 2) csv.fail("expected 2 fields");
    if (tail_seen) csv.fail("rows after the tail row");
    const double lag = csv.number(f[0], "lag");
    const double v = csv.number(f[1], "g");
    if (!std::isfinite(v)) csv.fail("kernel values must be finite");
    if (lag == 0.0) {
      tail = v;
      tail_seen = true;
    } else if (lag == static_cast<double>(g.size() + 1)) {
      g.push_back(v);
    } else {
      csv.fail("lags must run 1, 2, ...");
    }
  }
  if (g.empty()) throw DataError(path.string() + ": empty kernel");
  return tabulated_kernel(to_array(g), tail);
}

void write_filter_csv(const fs::path& path, const LinearFilter& filter) {
  auto out = open_out(path);
  out << "lag,b\n";
  for (Index l = 1; l <= filter.order(); ++l) out << l << ',' << format_double(filter.b[l - 1]) << '\n';
  finish(out, path);
}

ReturnSeries read_returns_csv(const fs::path& path) {
  CsvReader csv(path, {{"timestamp", "return"}});
  std::vector<double> ts, r;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 2) csv.fail("expected 2 fields");
    const double t = csv.number(f[0], "timestamp");
    const double v = csv.number(f[1], "return");
    if (!std::isfinite(v)) csv.fail("return must be finite");
    if (!ts.empty() && !(t > ts.back())) csv.fail("timestamps must increase strictly");
    ts.push_back(t);
    r.push_back(v);
  }
  if (r.empty()) throw DataError(path.string() + ": no returns");
  return ReturnSeries{to_array(ts), to_array(r)};
}

void write_returns_csv(const fs::path& path, const ReturnSeries& s) {
  auto out = open_out(path);
  out << "timestamp,return\n";
  for (Index i = 0; i < s.size(); ++i)
    out << format_double(s.timestamps[i]) << ',' << format_double(s.returns[i]) << '\n';
  finish(out, path);
}

NewsFeed read_news_csv(const fs::path& path) {
  CsvReader csv(path, {{"timestamp", "ticker"}});
  std::vector<double> ts;
  NewsFeed feed;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 2 || f[1].empty()) csv.fail("expected timestamp and nonempty ticker");
    ts.push_back(csv.number(f[0], "timestamp"));
    feed.tickers.push_back(f[1]);
  }
  feed.timestamps = to_array(ts);
  return feed;
}

void write_news_csv(const fs::path& path, const NewsFeed& feed) {
  auto out = open_out(path);
  out << "timestamp,ticker\n";
  for (Index i = 0; i < feed.size(); ++i)
    out << format_double(feed.timestamps[i]) << ',' << feed.tickers[static_cast<std::size_t>(i)] << '\n';
  finish(out, path);
}

void write_events_csv(const fs::path& path, const std::vector<JumpEvent>& events) {
  auto out = open_out(path);
  out << "t,s_realized,direction,classification,matched_news_time\n";
  for (const auto& e : events) {
    out << format_double(e.t) << ',' << format_double(e.s_realized) << ',' << e.direction << ','
        << to_string(e.classification) << ',';
    if (e.matched_news_time) out << format_double(*e.matched_news_time);
    out << '\n';
  }
  finish(out, path);
}

void write_cumulative_csv(const fs::path& path, const std::vector<std::pair<double, Index>>& points) {
  auto out = open_out(path);
  out << "s,count\n";
  for (const auto& [s, n] : points) out << format_double(s) << ',' << n << '\n';
  finish(out, path);
}

void write_coupled_csv(const fs::path& path, const CoupledSeries& s) {
  auto out = open_out(path);
  out << "t,spread,vol,crisis\n";
  for (Index t = 0; t < s.size(); ++t)
    out << t << ',' << format_double(s.spread[t]) << ',' << format_double(s.vol[t]) << ',' << (s.crisis[t] ? 1 : 0)
        << '\n';
  finish(out, path);
}

AssetTable read_assets_csv(const fs::path& path) {
  CsvReader csv(path, {{"asset", "sigma1_sq", "r1_sq"}});
  AssetTable t;
  std::vector<double> s2, r2;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 3 || f[0].empty()) csv.fail("expected asset name and two values");
    const double a = csv.number(f[1], "sigma1_sq"), b = csv.number(f[2], "r1_sq");
    if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
      csv.fail("squared volatilities must be finite and nonnegative");
    t.names.push_back(f[0]);
    s2.push_back(a);
    r2.push_back(b);
  }
  t.sigma1_sq = to_array(s2);
  t.r1_sq = to_array(r2);
  return t;
}

void write_assets_csv(const fs::path& path, const AssetTable& t) {
  auto out = open_out(path);
  out << "asset,sigma1_sq,r1_sq\n";
  for (std::size_t i = 0; i < t.names.size(); ++i) {
    const auto k = static_cast<Index>(i);
    out << t.names[i] << ',' << format_double(t.sigma1_sq[k]) << ',' << format_double(t.r1_sq[k]) << '\n';
  }
  finish(out, path);
}

}  // namespace impact::io
