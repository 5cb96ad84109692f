// SPDX-License-Identifier: Apache-2.0
#include "istn/experiment.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <ostream>

#include "istn/waterfill.hpp"

namespace istn {

std::vector<double> sweep_values(const SweepAxis& axis, const SystemParams& base) {
  std::vector<double> v;
  if (axis.points <= 1) {
    v.push_back(axis.variable.empty() ? 0.0
                : axis.min != 0.0 || axis.max != 0.0 ? axis.min
                                                     : get_system_param(base, axis.variable));
    return v;
  }
  for (int i = 0; i < axis.points; ++i) {
    const double f = static_cast<double>(i) / (axis.points - 1);
    if (axis.scale == SweepAxis::Scale::log)
      v.push_back(axis.min * std::pow(axis.max / axis.min, f));
    else
      v.push_back(axis.min + f * (axis.max - axis.min));
  }
  return v;
}

std::vector<std::string> default_methods(const std::string& experiment) {
  if (experiment == "sumrate_vs_pbs" || experiment == "scnr_vs_pbs" || experiment == "ts_split")
    return {"proposed", "interference_free", "zf_eps", "greedy", "uniform"};
  if (experiment == "association_compare")
    return {"assoc_proposed", "assoc_nearest", "assoc_greedy", "assoc_random"};
  if (experiment == "failure_vs_radius")
    return {"proposed", "assoc_random", "satellite_free", "monostatic"};
  if (experiment == "multicell_sumrate")
    return {"proposed", "coop_uniform", "interference_free", "greedy"};
  if (experiment == "normalized_vs_M") return {"proposed", "interference_free"};
  throw istn_error("unknown experiment: " + experiment);
}

bool is_failure_experiment(const std::string& experiment) {
  return experiment == "failure_vs_radius";
}

namespace {

Association make_association(AssocRule rule, const SeedContext& ctx, const SystemParams& p, int m,
                             const CellChannelSet& ch, uint64_t master_seed, uint64_t seed_index,
                             const std::string& method_name) {
  switch (rule) {
    case AssocRule::proposed:
      return associate_proposed(ch.sens.alpha_tar, ctx.geom.cells[m].theta_r_tar,
                                ctx.geom.cells[m].theta_sat_rad, p.delta_sat, p.delta_tar);
    case AssocRule::nearest:
      return associate_nearest(ch.sens.alpha_tar);
    case AssocRule::greedy:
      return associate_greedy(ch.sens.alpha_tar);
    case AssocRule::random: {
      RngStream rng(master_key(master_seed).child(
          {seed_index, static_cast<uint64_t>(m), tag(StreamTag::method),
           hash_name(method_name.c_str())}));
      return associate_random(ch.sens.n_tar, ch.sens.n_rad, rng);
    }
  }
  throw istn_error("bad association rule");
}

std::string assoc_string(const Association& a) {
  std::string s;
  for (int i = 0; i < a.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(a.receiver_of[i]);
    if (a.fallback[i]) s += '*';
  }
  return s;
}

DiagRow diag_from_report(const SolveReport& rep, const std::string& stage,
                         const std::string& method, int seed, int cell,
                         const Association& assoc) {
  DiagRow d;
  d.method = method;
  d.stage = stage;
  d.seed = seed;
  d.cell = cell;
  d.converged = rep.converged;
  d.infeasible = rep.infeasible;
  d.iterations = rep.iterations;
  d.objective = rep.objective;
  d.sut_slack = rep.sut_rate_slack;
  d.scnr_slack_db = rep.min_scnr_slack_db;
  d.power_slack = rep.power_slack;
  d.assoc = assoc_string(assoc);
  return d;
}

CellRecord record_from_metrics(int seed, int m, bool feasible, const CellMetrics& met) {
  CellRecord r;
  r.seed = seed;
  r.cell = m;
  r.feasible = feasible;
  r.istn = met.istn_sum();
  r.terr = met.terr_sum();
  r.sat = met.rate_sut;
  r.sut = met.rate_sut;
  r.min_scnr_db = met.min_scnr_db();
  r.rate_tut.assign(met.rate_tut.data(), met.rate_tut.data() + met.rate_tut.size());
  for (int i = 0; i < met.scnr_lin.size(); ++i)
    r.scnr_db.push_back(lin_to_db(std::max(met.scnr_lin(i), 1e-300)));
  return r;
}

std::vector<CellRecord> eval_failure_probe(const MethodSpec& spec, const SystemParams& params,
                                           const SeedContext& ctx, uint64_t master_seed,
                                           uint64_t seed_index) {
  std::vector<CellRecord> out;
  for (int m = 0; m < params.M; ++m) {
    const CellChannelSet ch = cell_view(ctx, params, m, Snapshot::refine, SatCsi::truth);
    const Association assoc =
        make_association(spec.assoc, ctx, params, m, ch, master_seed, seed_index, spec.name);
    const double p_probe = spec.satellite_free ? 0.0 : params.P_LEO / params.M;
    double viol = 0.0, minscnr = 0.0;
    const bool ok = sensing_feasible(ch, assoc, params, p_probe, &viol, &minscnr);
    CellRecord r;
    r.seed = static_cast<int>(seed_index);
    r.cell = m;
    r.feasible = ok;
    r.sensing_fail = !ok;
    r.min_scnr_db = minscnr;
    out.push_back(r);
  }
  return out;
}

std::vector<CellRecord> eval_wmmse_fixed_power(const MethodSpec& spec, const SystemParams& params,
                                               const SeedContext& ctx, uint64_t master_seed,
                                               uint64_t seed_index, std::vector<DiagRow>* diags) {
  std::vector<CellRecord> out;
  for (int m = 0; m < params.M; ++m) {
    const CellChannelSet ch = cell_view(ctx, params, m, Snapshot::refine, SatCsi::predicted);
    const Association assoc =
        make_association(spec.assoc, ctx, params, m, ch, master_seed, seed_index, spec.name);
    const double p_cell = spec.satellite_free ? 0.0 : params.P_LEO / params.M;

    const bool sensing_ok = sensing_feasible(ch, assoc, params, p_cell);
    bool feasible = sensing_ok;
    Beamformer f;
    if (sensing_ok) {
      const WmmseOutcome p3 = solve_p3(ch, assoc, params, p_cell);
      f = p3.F;
      feasible = !p3.report.infeasible;
      if (diags)
        diags->push_back(diag_from_report(p3.report, "p3", spec.name,
                                          static_cast<int>(seed_index), m, assoc));
    } else {
      f = matched_init(ch, assoc, params);
    }

    const CellChannelSet ch_true = cell_view(ctx, params, m, Snapshot::refine, SatCsi::truth);
    const ReceiveFilters w = mmse_filters(f, ch_true, assoc, p_cell, params, spec.toggles);
    const CellMetrics met = evaluate_cell(f, w, ch_true, assoc, p_cell, params, spec.toggles);
    CellRecord r = record_from_metrics(static_cast<int>(seed_index), m, feasible, met);
    r.sensing_fail = !sensing_ok;
    out.push_back(r);
  }
  return out;
}

std::vector<CellRecord> eval_proposed(const MethodSpec& spec, const SystemParams& params,
                                      const SeedContext& ctx, uint64_t seed_index,
                                      bool parallel_cells, std::vector<DiagRow>* diags) {
  const CooperationRun run = run_cooperation(ctx, params, parallel_cells);
  std::vector<CellRecord> out;
  for (int m = 0; m < params.M; ++m) {
    const CellOutcome& cell = run.cells[m];
    const CellChannelSet ch_true = cell_view(ctx, params, m, Snapshot::refine, SatCsi::truth);
    const ReceiveFilters w = mmse_filters(cell.F, ch_true, cell.assoc, cell.p_final, params);
    const CellMetrics met =
        evaluate_cell(cell.F, w, ch_true, cell.assoc, cell.p_final, params, spec.toggles);
    CellRecord r =
        record_from_metrics(static_cast<int>(seed_index), m, cell.feasible, met);
    r.sensing_fail = !cell.sensing_ok;
    out.push_back(r);
    if (diags) {
      diags->push_back(diag_from_report(cell.rep_p1, "p1", spec.name,
                                        static_cast<int>(seed_index), m, cell.assoc));
      diags->push_back(diag_from_report(cell.rep_p3, "p3", spec.name,
                                        static_cast<int>(seed_index), m, cell.assoc));
    }
  }
  return out;
}

std::vector<CellRecord> eval_zf_family(const MethodSpec& spec, const SystemParams& params,
                                       const SeedContext& ctx, uint64_t master_seed,
                                       uint64_t seed_index) {
  // satellite side first: water-filling over its own SUT links, or the
  // exhaustive power search per cell
  Eigen::VectorXd p_sat(params.M), p_tbs(params.M);
  p_tbs.setConstant(params.P_BS);
  std::vector<CellChannelSet> views;
  views.reserve(params.M);
  for (int m = 0; m < params.M; ++m)
    views.push_back(cell_view(ctx, params, m, Snapshot::refine, SatCsi::truth));

  if (spec.sat_power == MethodSpec::SatPower::eps) {
    SystemParams per_cell = params;
    per_cell.P_LEO = params.P_LEO / params.M;
    for (int m = 0; m < params.M; ++m) {
      const Association assoc = associate_nearest(views[m].sens.alpha_tar);
      const auto [ps, pt] = eps_satellite_power(views[m], assoc, per_cell, params.eps_grid_size);
      p_sat(m) = ps;
      p_tbs(m) = pt;
    }
  } else if (spec.sat_power == MethodSpec::SatPower::uniform) {
    p_sat.setConstant(params.P_LEO / params.M);
  } else {
    Eigen::VectorXd g(params.M), d(params.M), caps(params.M);
    for (int m = 0; m < params.M; ++m) {
      g(m) = views[m].sat.g_sut;
      d(m) = params.sigma2_sut();
      caps(m) = std::numeric_limits<double>::infinity();
    }
    p_sat = capped_waterfill(g, d, params.P_LEO, caps);
  }

  std::vector<CellRecord> out;
  for (int m = 0; m < params.M; ++m) {
    const Association assoc =
        make_association(spec.assoc, ctx, params, m, views[m], master_seed, seed_index, spec.name);
    const double p_design =
        (spec.design_ignores_sat || !spec.toggles.sat_to_terr) ? 0.0 : p_sat(m);
    const ZfDesign zf =
        zf_beamformer(views[m], assoc, params, p_design, p_tbs(m), spec.tbs_power, spec.toggles);
    const ReceiveFilters w = mmse_filters(zf.F, views[m], assoc, p_sat(m), params, spec.toggles);
    const CellMetrics met = evaluate_cell(zf.F, w, views[m], assoc, p_sat(m), params, spec.toggles);
    out.push_back(record_from_metrics(static_cast<int>(seed_index), m, zf.scnr_feasible, met));
  }
  return out;
}

}  // namespace

std::vector<CellRecord> evaluate_method(const MethodSpec& spec, const SystemParams& params,
                                        const SeedContext& ctx, uint64_t master_seed,
                                        uint64_t seed_index, bool failure_probe,
                                        bool parallel_cells, std::vector<DiagRow>* diags) {
  // the monostatic transform changes the receiver layout, so it prepares its
  // own channels (same geometry stream; co-located receiver)
  if (spec.monostatic) {
    const SystemParams mono = monostatic_config(params);
    const StreamKey seed_key = master_key(master_seed).child(seed_index);
    Geometry geom = generate_geometry(mono, mix64(seed_key.state ^ tag(StreamTag::geometry)));
    for (auto& cell : geom.cells) {
      cell.radar.assign(1, Eigen::Vector3d{0.0, 0.0, mono.tut_height});
      recompute_cell_links(cell, mono);
    }
    const SeedContext mono_ctx = prepare_seed_with_geometry(mono, master_seed, seed_index, geom);
    MethodSpec inner = spec;
    inner.monostatic = false;
    return evaluate_method(inner, mono, mono_ctx, master_seed, seed_index, failure_probe,
                           parallel_cells, diags);
  }

  if (failure_probe) return eval_failure_probe(spec, params, ctx, master_seed, seed_index);
  if (spec.bf == MethodSpec::Bf::wmmse) {
    if (spec.sat_power == MethodSpec::SatPower::wmmse_joint_merge)
      return eval_proposed(spec, params, ctx, seed_index, parallel_cells, diags);
    return eval_wmmse_fixed_power(spec, params, ctx, master_seed, seed_index, diags);
  }
  return eval_zf_family(spec, params, ctx, master_seed, seed_index);
}

namespace {

struct TaskOutput {
  // per method: the per-cell records of this (point, seed) task
  std::vector<std::vector<CellRecord>> per_method;
  std::vector<DiagRow> diags;
  std::string error;
};

TaskOutput run_task(const ExperimentSpec& spec, const SystemParams& base,
                    const std::vector<MethodSpec>& methods, double sweep_value,
                    uint64_t seed_index, bool failure, bool parallel_cells) {
  TaskOutput out;
  out.per_method.resize(methods.size());
  try {
    SystemParams params = base;
    if (!spec.sweep.variable.empty() && spec.sweep.points >= 1)
      set_system_param_value(params, spec.sweep.variable, sweep_value);
    if (auto issues = validate_params(params); !issues.empty())
      throw istn_error("sweep produced invalid params: " + issues.front());

    const SeedContext ctx = prepare_seed(params, spec.master_seed, seed_index);
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<DiagRow> diags;
      out.per_method[mi] = evaluate_method(methods[mi], params, ctx, spec.master_seed, seed_index,
                                           failure, parallel_cells, &diags);
      for (auto& d : diags) {
        d.sweep_value = sweep_value;
        out.diags.push_back(std::move(d));
      }
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

ResultTable aggregate(const ExperimentSpec& spec, const std::vector<MethodSpec>& methods,
                      const std::vector<double>& values, std::vector<TaskOutput>& outs,
                      bool failure) {
  for (const auto& t : outs)
    if (!t.error.empty()) throw istn_error("experiment task failed: " + t.error);

  ResultTable table;
  const int n_seeds = spec.seeds;
  for (size_t vi = 0; vi < values.size(); ++vi) {
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      MethodPointResult row;
      row.method = methods[mi].name;
      row.sweep_value = values[vi];
      row.seed_count = n_seeds;
      for (int s = 0; s < n_seeds; ++s) {
        const TaskOutput& t = outs[vi * n_seeds + s];
        for (const CellRecord& r : t.per_method[mi]) row.records.push_back(r);
      }
      int feas = 0, fails = 0;
      double istn = 0, terr = 0, sat = 0, sut = 0, scnr = 0;
      int scnr_n = 0;
      for (const CellRecord& r : row.records) {
        feas += r.feasible ? 1 : 0;
        fails += r.sensing_fail ? 1 : 0;
        const bool count_rates = failure ? true : r.feasible;
        if (count_rates && !failure) {
          istn += r.istn;
          terr += r.terr;
          sat += r.sat;
          sut += r.sut;
        }
        if ((failure || r.feasible) && std::isfinite(r.min_scnr_db)) {
          scnr += r.min_scnr_db;
          ++scnr_n;
        }
      }
      const int total = static_cast<int>(row.records.size());
      const int denom_rates = failure ? total : feas;
      const double scale = total > 0 ? static_cast<double>(total) / n_seeds : 1.0;  // cells per seed
      if (denom_rates > 0) {
        row.istn_sum_rate = istn / denom_rates * scale;
        row.terr_sum_rate = terr / denom_rates * scale;
        row.sat_sum_rate = sat / denom_rates * scale;
        row.sut_rate = sut / denom_rates;
      }
      row.min_scnr_db = scnr_n > 0 ? scnr / scnr_n : std::numeric_limits<double>::quiet_NaN();
      row.failure_prob =
          total > 0 ? static_cast<double>(failure ? fails : total - feas) / total : 0.0;
      row.feasible_frac = total > 0 ? static_cast<double>(feas) / total : 1.0;
      table.rows.push_back(std::move(row));
    }
  }
  // diagnostics in deterministic task order
  for (auto& t : outs)
    for (auto& d : t.diags) table.diagnostics.push_back(std::move(d));
  return table;
}

std::vector<MethodSpec> resolve_methods(const ExperimentSpec& spec) {
  const auto names = spec.methods.empty() ? default_methods(spec.name) : spec.methods;
  std::vector<MethodSpec> methods;
  methods.reserve(names.size());
  for (const auto& n : names) methods.push_back(method_spec(n));
  return methods;
}

}  // namespace

ResultTable run_experiment_serial(const ExperimentSpec& spec, const SystemParams& base) {
  const auto methods = resolve_methods(spec);
  const auto values = sweep_values(spec.sweep, base);
  const bool failure = is_failure_experiment(spec.name);
  std::vector<TaskOutput> outs(values.size() * spec.seeds);
  for (size_t vi = 0; vi < values.size(); ++vi)
    for (int s = 0; s < spec.seeds; ++s)
      outs[vi * spec.seeds + s] =
          run_task(spec, base, methods, values[vi], static_cast<uint64_t>(s), failure, true);
  return aggregate(spec, methods, values, outs, failure);
}

ResultTable run_experiment(const ExperimentSpec& spec, const SystemParams& base, int workers) {
  if (workers == 1) return run_experiment_serial(spec, base);
  const auto methods = resolve_methods(spec);
  const auto values = sweep_values(spec.sweep, base);
  const bool failure = is_failure_experiment(spec.name);
  const int n_tasks = static_cast<int>(values.size()) * spec.seeds;
  std::vector<TaskOutput> outs(n_tasks);

  if (workers > 0) omp_set_num_threads(workers);
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n_tasks; ++t) {
    const size_t vi = static_cast<size_t>(t) / spec.seeds;
    const int s = t % spec.seeds;
    outs[t] =
        run_task(spec, base, methods, values[vi], static_cast<uint64_t>(s), failure, false);
  }
  return aggregate(spec, methods, values, outs, failure);
}

// ---- CSV writers ----

namespace {
std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace

void write_results_csv(const ResultTable& table, const ExperimentSpec& spec, std::ostream& os) {
  os << "experiment,method,sweep_var,sweep_value,seed_count,istn_sum_rate,terr_sum_rate,"
        "sat_sum_rate,min_scnr_db,sut_rate,failure_prob,feasible_frac\n";
  for (const auto& r : table.rows) {
    os << spec.name << ',' << r.method << ',' << spec.sweep.variable << ','
       << num(r.sweep_value) << ',' << r.seed_count << ',' << num(r.istn_sum_rate) << ','
       << num(r.terr_sum_rate) << ',' << num(r.sat_sum_rate) << ',' << num(r.min_scnr_db) << ','
       << num(r.sut_rate) << ',' << num(r.failure_prob) << ',' << num(r.feasible_frac) << '\n';
  }
}

void write_metrics_csv(const ResultTable& table, const ExperimentSpec& spec, std::ostream& os) {
  os << "experiment,method,sweep_value,seed,cell,entity,value\n";
  for (const auto& row : table.rows) {
    for (const auto& r : row.records) {
      for (size_t k = 0; k < r.rate_tut.size(); ++k)
        os << spec.name << ',' << row.method << ',' << num(row.sweep_value) << ',' << r.seed
           << ',' << r.cell << ",tut" << k << ',' << num(r.rate_tut[k]) << '\n';
      os << spec.name << ',' << row.method << ',' << num(row.sweep_value) << ',' << r.seed << ','
         << r.cell << ",sut," << num(r.sut) << '\n';
      for (size_t i = 0; i < r.scnr_db.size(); ++i)
        os << spec.name << ',' << row.method << ',' << num(row.sweep_value) << ',' << r.seed
           << ',' << r.cell << ",target" << i << ',' << num(r.scnr_db[i]) << '\n';
    }
  }
}

void write_diagnostics_csv(const ResultTable& table, const ExperimentSpec& spec,
                           std::ostream& os) {
  os << "experiment,method,stage,sweep_value,seed,cell,converged,infeasible,iterations,"
        "objective,sut_slack,scnr_slack_db,power_slack,assoc\n";
  for (const auto& d : table.diagnostics) {
    os << spec.name << ',' << d.method << ',' << d.stage << ',' << num(d.sweep_value) << ','
       << d.seed << ',' << d.cell << ',' << (d.converged ? 1 : 0) << ','
       << (d.infeasible ? 1 : 0) << ',' << d.iterations << ',' << num(d.objective) << ','
       << num(d.sut_slack) << ',' << num(d.scnr_slack_db) << ',' << num(d.power_slack) << ','
       << d.assoc << '\n';
  }
}

}  // namespace istn
