#include <sstream>

#include "cfdim/verify.hpp"

namespace cfdim {

Check& Report::add(std::string name, double statistic, double lo, double hi, std::string note) {
  Check c;
  c.name = std::move(name);
  c.statistic = statistic;
  c.lo = lo;
  c.hi = hi;
  c.pass = statistic >= lo && statistic <= hi;
  c.note = std::move(note);
  checks.push_back(std::move(c));
  return checks.back();
}

std::size_t Report::passed() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 1 : 0;
  return n;
}

Json Report::to_json() const {
  Json j;
  j["suite"] = suite;
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json o;
    o["name"] = c.name;
    o["statistic"] = c.statistic;
    o["bound"] = Json::array({c.lo, c.hi});
    o["pass"] = c.pass;
    if (!c.note.empty()) o["note"] = c.note;
    arr.push_back(std::move(o));
  }
  j["checks"] = std::move(arr);
  if (!series.empty()) {
    Json s = Json::array();
    for (const auto& r : series) s.push_back(Json::array({r.series, r.x, r.value, r.lo, r.hi}));
    j["series_columns"] = Json::array({"series", "x", "value", "lo", "hi"});
    j["series"] = std::move(s);
  }
  j["summary"] = {{"total", checks.size()}, {"passed", passed()}, {"failed", failed()}};
  return j;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  if (!series.empty()) {
    os << "series,x,value,lo,hi\n";
    for (const auto& r : series)
      os << r.series << ',' << Json(r.x).dump() << ',' << Json(r.value).dump() << ','
         << Json(r.lo).dump() << ',' << Json(r.hi).dump() << '\n';
  } else {
    os << "name,statistic,lo,hi,pass\n";
    for (const auto& c : checks)
      os << c.name << ',' << Json(c.statistic).dump() << ',' << Json(c.lo).dump() << ','
         << Json(c.hi).dump() << ',' << (c.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace cfdim
