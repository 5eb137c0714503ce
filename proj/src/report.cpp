#include "scriptqa/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scriptqa {

std::string results_to_json(const std::vector<EvalResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const EvalResult& r : results) {
    nlohmann::json j;
    j["model"] = r.model;
    j["test"] = r.test;
    j["n"] = r.n;
    j["correct"] = r.correct;
    j["accuracy"] = r.accuracy;
    j["chance"] = r.chance;
    j["seed"] = r.seed;
    j["info"] = r.info;
    nlohmann::json ps = nlohmann::json::object();
    for (const auto& [script, cn] : r.per_script) {
      ps[script] = {{"correct", cn.first}, {"n", cn.second}};
    }
    j["per_script"] = ps;
    arr.push_back(j);
  }
  return arr.dump(2);
}

std::vector<EvalResult> results_from_json(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text);
  std::vector<EvalResult> out;
  for (const auto& j : arr) {
    EvalResult r;
    r.model = j.at("model").get<std::string>();
    r.test = j.at("test").get<std::string>();
    r.n = j.at("n").get<long long>();
    r.correct = j.at("correct").get<long long>();
    r.accuracy = j.at("accuracy").get<double>();
    r.chance = j.at("chance").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [key, val] : j.at("info").items()) {
      r.info[key] = val.get<std::string>();
    }
    for (const auto& [script, cn] : j.at("per_script").items()) {
      r.per_script[script] = {cn.at("correct").get<long long>(),
                              cn.at("n").get<long long>()};
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string results_to_csv(const std::vector<EvalResult>& results) {
  std::ostringstream out;
  out << "model,test,script,n,correct,accuracy,chance,seed\n";
  for (const EvalResult& r : results) {
    for (const auto& [script, cn] : r.per_script) {
      out << r.model << ',' << r.test << ',' << script << ',' << cn.second
          << ',' << cn.first << ','
          << fmt_double((double)cn.first / (double)cn.second) << ",," << r.seed
          << '\n';
    }
    out << r.model << ',' << r.test << ",overall," << r.n << ',' << r.correct
        << ',' << fmt_double(r.accuracy) << ',' << fmt_double(r.chance) << ','
        << r.seed << '\n';
  }
  return out.str();
}

std::string results_to_svg(const std::vector<EvalResult>& results) {
  // Stable group (test) and series (model) orders: first appearance.
  std::vector<std::string> tests, models;
  for (const EvalResult& r : results) {
    if (std::find(tests.begin(), tests.end(), r.test) == tests.end())
      tests.push_back(r.test);
    if (std::find(models.begin(), models.end(), r.model) == models.end())
      models.push_back(r.model);
  }
  auto find = [&](const std::string& test,
                  const std::string& model) -> const EvalResult* {
    for (const EvalResult& r : results) {
      if (r.test == test && r.model == model) return &r;
    }
    return nullptr;
  };

  const double W = 880, H = 420;
  const double left = 70, right = 30, top = 50, bottom = 70;
  const double plot_w = W - left - right, plot_h = H - top - bottom;
  const double group_w = plot_w / (double)tests.size();
  const double bar_w =
      group_w * 0.7 / (double)models.size();  // 30% group padding
  const char* colors[] = {"#4878a8", "#c08030", "#7a9a4a", "#9a5a8a"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2
    << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"16\">Exact-match accuracy by test</text>\n";

  // Axes and gridlines.
  for (int i = 0; i <= 4; ++i) {
    double frac = i / 4.0;
    double y = top + plot_h * (1.0 - frac);
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << frac << "</text>\n";
  }
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
    << "\" y2=\"" << top + plot_h << "\" stroke=\"#333333\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
    << left + plot_w << "\" y2=\"" << top + plot_h
    << "\" stroke=\"#333333\"/>\n";

  for (std::size_t ti = 0; ti < tests.size(); ++ti) {
    double gx = left + group_w * (double)ti;
    double bars_w = bar_w * (double)models.size();
    double start = gx + (group_w - bars_w) / 2.0;
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      const EvalResult* r = find(tests[ti], models[mi]);
      if (!r) continue;
      double x = start + bar_w * (double)mi;
      double h = plot_h * r->accuracy;
      double y = top + plot_h - h;
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w - 3
        << "\" height=\"" << h << "\" fill=\"" << colors[mi % 4] << "\"/>\n";
      s << "<text x=\"" << x + (bar_w - 3) / 2 << "\" y=\"" << y - 4
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << (int)(r->accuracy * 100 + 0.5) << "</text>\n";
      // Dashed chance marker across this bar.
      double cy = top + plot_h * (1.0 - r->chance);
      s << "<line x1=\"" << x - 2 << "\" y1=\"" << cy << "\" x2=\""
        << x + bar_w - 1 << "\" y2=\"" << cy
        << "\" stroke=\"#222222\" stroke-dasharray=\"4,3\"/>\n";
    }
    s << "<text x=\"" << gx + group_w / 2 << "\" y=\"" << top + plot_h + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << tests[ti] << "</text>\n";
  }

  // Legend.
  double lx = left, ly = H - 28;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    s << "<rect x=\"" << lx << "\" y=\"" << ly - 10
      << "\" width=\"12\" height=\"12\" fill=\"" << colors[mi % 4] << "\"/>\n";
    s << "<text x=\"" << lx + 17 << "\" y=\"" << ly
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << models[mi]
      << "</text>\n";
    lx += 130;
  }
  s << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24
    << "\" y2=\"" << ly - 4
    << "\" stroke=\"#222222\" stroke-dasharray=\"4,3\"/>\n";
  s << "<text x=\"" << lx + 30 << "\" y=\"" << ly
    << "\" font-family=\"sans-serif\" font-size=\"12\">chance</text>\n";

  // Provenance footer: eval seed per (model, test).
  std::ostringstream seeds;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i) seeds << "  ";
    seeds << results[i].model << '/' << results[i].test << " seed "
          << results[i].seed;
  }
  s << "<text x=\"" << W - right << "\" y=\"" << H - 8
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\" "
       "fill=\"#888888\">"
    << seeds.str() << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(content.data(), (std::streamsize)content.size());
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace scriptqa
