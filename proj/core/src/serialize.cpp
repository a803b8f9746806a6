#include "qpgp/serialize.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qpgp/error.hpp"

namespace qpgp {

using nlohmann::json;

namespace {

json kernel_json(const PeriodicKernel& kernel) {
  json j;
  j["form"] = kernel.form_name();
  j["p"] = kernel.period();
  struct Visitor {
    json& j;
    void operator()(const MacKayForm& f) const {
      j["theta"] = f.theta;
      j["sigma2"] = f.sigma2;
    }
    void operator()(const MaternForm& f) const {
      j["nu"] = f.nu;
      j["theta"] = f.theta;
      j["sigma2"] = f.sigma2;
    }
    void operator()(const CosineForm& f) const {
      j["iota"] = f.iota;
      j["sigma2"] = f.sigma2;
    }
    void operator()(const TabulatedForm& f) const { j["values"] = f.values; }
  };
  std::visit(Visitor{j}, kernel.form());
  return j;
}

PeriodicKernel kernel_parse(const json& j) {
  try {
    const std::string form = j.at("form").get<std::string>();
    const int p = j.at("p").get<int>();
    if (form == "mackay") {
      return PeriodicKernel::mackay(p, j.at("theta").get<double>(), j.at("sigma2").get<double>());
    }
    if (form == "matern") {
      return PeriodicKernel::matern(p, j.at("nu").get<double>(), j.at("theta").get<double>(),
                                    j.at("sigma2").get<double>());
    }
    if (form == "cosine") {
      return PeriodicKernel::cosine(p, j.at("iota").get<int>(), j.at("sigma2").get<double>());
    }
    if (form == "tabulated") {
      return PeriodicKernel::tabulated(p, j.at("values").get<std::vector<double>>());
    }
    throw Error("bad-kernel-spec", "unknown form: " + form);
  } catch (const json::exception& e) {
    throw Error("bad-kernel-spec", std::string("malformed kernel spec: ") + e.what());
  }
}

std::string dump(const json& j, int indent) {
  return indent < 0 ? j.dump() : j.dump(indent);
}

json param_stats_json(const ParamStats& s) {
  return json{{"se", s.se}, {"ci", {s.ci_lo, s.ci_hi}}};
}

json fit_json(const FitResult& fit) {
  json j;
  j["omega_hat"] = fit.omega_hat;
  j["kernel"] = kernel_json(fit.kernel_hat);
  j["iters"] = fit.iters;
  j["converged"] = fit.converged;
  j["grad_norm"] = fit.final_grad_norm;
  j["reduced_nll"] = fit.reduced_nll;
  if (fit.eipse) j["eipse"] = *fit.eipse;
  return j;
}

}  // namespace

std::string kernel_to_json(const PeriodicKernel& kernel, int indent) {
  return dump(kernel_json(kernel), indent);
}

PeriodicKernel kernel_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("bad-kernel-spec", std::string("invalid JSON: ") + e.what());
  }
  return kernel_parse(j);
}

std::string fit_to_json(const FitResult& fit, int indent) {
  return dump(fit_json(fit), indent);
}

FitResult fit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("bad-fit-json", std::string("invalid JSON: ") + e.what());
  }
  try {
    FitResult fit{.kernel_hat = kernel_parse(j.at("kernel"))};
    fit.omega_hat = j.at("omega_hat").get<double>();
    fit.iters = j.value("iters", 0);
    fit.converged = j.value("converged", true);
    fit.final_grad_norm = j.value("grad_norm", 0.0);
    fit.reduced_nll = j.value("reduced_nll", 0.0);
    if (j.contains("eipse")) fit.eipse = j["eipse"].get<double>();
    if (j["kernel"].contains("theta")) fit.theta_hat = j["kernel"]["theta"].get<double>();
    if (j["kernel"].contains("iota")) fit.theta_hat = j["kernel"]["iota"].get<double>();
    if (j["kernel"].contains("sigma2")) fit.sigma2_hat = j["kernel"]["sigma2"].get<double>();
    return fit;
  } catch (const json::exception& e) {
    throw Error("bad-fit-json", std::string("malformed fit JSON: ") + e.what());
  }
}

std::string fit_report_json(const FitResult& fit, const BootstrapSummary* bootstrap,
                            const PeriodSelection* selection, int indent) {
  json j = fit_json(fit);
  if (bootstrap) j["bootstrap"] = json::parse(bootstrap_to_json(*bootstrap, -1));
  if (selection) j["selection"] = json::parse(period_selection_to_json(*selection, -1));
  return dump(j, indent);
}

std::string bootstrap_to_json(const BootstrapSummary& summary, int indent) {
  json j;
  j["M"] = summary.m;
  j["alpha"] = summary.alpha;
  j["omega"] = param_stats_json(summary.omega);
  if (summary.theta) {
    j["kernel"]["theta"] = param_stats_json(*summary.theta);
    j["kernel"]["sigma2"] = param_stats_json(*summary.sigma2);
  } else {
    json lags = json::array();
    for (std::size_t t = 0; t < summary.kappa.size(); ++t) {
      json entry = param_stats_json(summary.kappa[t]);
      entry["lag"] = t;
      lags.push_back(entry);
    }
    j["kernel"]["kappa"] = lags;
  }
  j["failures"] = summary.failures;
  if (summary.flagged) j["flagged"] = true;
  if (summary.low_m_warning) j["low_m_warning"] = true;
  return dump(j, indent);
}

std::string period_selection_to_json(const PeriodSelection& sel, int indent) {
  json j;
  j["criterion"] = "reduced_nll";
  j["chosen"] = sel.chosen_p;
  json cands = json::array();
  for (const auto& c : sel.ranked) {
    cands.push_back(json{{"p", c.p},
                         {"reduced_nll", c.reduced_nll},
                         {"n", c.n},
                         {"k", c.k},
                         {"l", c.l},
                         {"converged", c.fit.converged}});
  }
  j["candidates"] = cands;
  return dump(j, indent);
}

std::string kernel_selection_to_json(const KernelSelection& sel, int indent) {
  json j;
  j["criterion"] = "eipse";
  j["chosen"] = sel.chosen;
  json cands = json::array();
  for (const auto& c : sel.ranked) {
    cands.push_back(json{{"family", c.name},
                         {"eipse", c.eipse},
                         {"omega_hat", c.fit.omega_hat},
                         {"converged", c.fit.converged}});
  }
  j["candidates"] = cands;
  return dump(j, indent);
}

std::string selection_to_csv(const PeriodSelection& sel) {
  std::ostringstream out;
  out << "p,reduced_nll\n";
  for (const auto& c : sel.ranked) out << c.p << "," << c.reduced_nll << "\n";
  return out.str();
}

std::string selection_to_csv(const KernelSelection& sel) {
  std::ostringstream out;
  out << "family,eipse\n";
  for (const auto& c : sel.ranked) out << c.name << "," << c.eipse << "\n";
  return out.str();
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("file-write-failed", "cannot write " + path);
  out.precision(17);
  return out;
}

}  // namespace

void write_series_csv(const std::string& path, const std::vector<double>& values) {
  auto out = open_out(path);
  for (double v : values) out << v << "\n";
}

void write_trace_csv(const std::string& path, const BlockSeries& series,
                     const PredictionTrace& trace, bool eipse_footer) {
  auto out = open_out(path);
  out << "t,y,y_hat,var_hat,lo95,hi95\n";
  for (std::size_t i = 0; i < trace.y_hat.size(); ++i) {
    const long t = static_cast<long>(i) + 2;
    out << t << "," << series.value(t) << "," << trace.y_hat[i] << "," << trace.var_hat[i] << ","
        << trace.lo95[i] << "," << trace.hi95[i] << "\n";
  }
  if (eipse_footer) out << "# eipse," << trace.eipse << "\n";
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
  auto out = open_out(path);
  out << "n,naive_ms,structured_ms,speedup,naive_value,structured_value\n";
  for (const auto& r : rows) {
    out << r.n << "," << r.naive_ms << "," << r.structured_ms << "," << r.speedup << ","
        << r.naive_value << "," << r.structured_value << "\n";
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace qpgp
