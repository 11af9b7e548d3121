use super::config::{Experiment, ExperimentConfig};
use crate::analysis::{
    avg_upper_bound, check_avg_upper_bound, check_nonincreasing, f_lambda_extended_verify, f_lambda_verify,
    fit_decay_rate, gamma_series, gamma_series_verify, holder_verify, lower_bound_probe, moment_bound_verify,
    neutral_recursion_verify, sgd_rate_report, BoundCheck, SlowSequence, Verdict, UNBOUNDED_GROWTH,
};
use crate::dynamics::{
    ensemble, martingale_diagnostic, mean_iterate_phi, recursion_check, IterationConfig, Schedule,
    DEFAULT_SCHEDULE_RATIO,
};
use crate::hilbert::{regularity, HilbertVector, Spectrum};
use crate::sampler::{assumption3_constant, resolvable_probes, SamplerKind, SamplerSpec};
use crate::Result;

/// One row of the results table: a recorded step `n`, a norm index `β` and
/// an estimate with the bound it is compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub n: usize,
    pub beta: f64,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Results {
    Series(Vec<SeriesRow>),
    Checks(Vec<BoundCheck>),
}

/// A named scalar outcome. Informational rows carry a NaN threshold and
/// always pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl SummaryRow {
    fn check(name: impl Into<String>, value: f64, threshold: f64, passed: bool) -> Self {
        SummaryRow {
            name: name.into(),
            value,
            threshold,
            passed,
        }
    }

    fn info(name: impl Into<String>, value: f64) -> Self {
        Self::check(name, value, f64::NAN, true)
    }

    fn from_bound(c: &BoundCheck) -> Self {
        Self::check(format!("{} violations", c.name), c.violations as f64, 0.0, c.passed())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub experiment: Experiment,
    pub results: Results,
    pub summary: Vec<SummaryRow>,
    /// `(replica, step)` for replicas whose iterates blew up.
    pub diverged: Vec<(u64, usize)>,
}

impl Outcome {
    pub fn failures(&self) -> impl Iterator<Item = &SummaryRow> {
        self.summary.iter().filter(|r| !r.passed)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// Validates the configuration and runs the experiment it names.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    let gamma = cfg.validate()?;
    let spectrum = cfg.build_spectrum()?;
    let theta0 = cfg.build_theta0()?;
    let ctx = Ctx {
        cfg,
        gamma,
        spectrum,
        theta0,
    };
    match cfg.experiment {
        Experiment::MeanRate => ctx.mean_rate(),
        Experiment::SgdRate => ctx.sgd_rate(),
        Experiment::Recursion => ctx.recursion(),
        Experiment::Lemmas => ctx.lemmas(),
        Experiment::AsConvergence => ctx.as_convergence(),
        Experiment::Assumption3 => ctx.assumption3(),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    gamma: f64,
    spectrum: Spectrum,
    theta0: HilbertVector,
}

impl Ctx<'_> {
    fn sampler(&self, kind: SamplerKind) -> SamplerSpec {
        SamplerSpec::new(kind, self.spectrum.clone(), self.cfg.seed)
    }

    fn iteration(&self, kind: SamplerKind, betas: Vec<f64>) -> Result<IterationConfig> {
        Ok(
            IterationConfig::new(self.sampler(kind), self.theta0.clone(), self.gamma, self.cfg.n_steps)?
                .with_replicas(self.cfg.n_replicas)
                .with_betas(betas)
                .with_schedule(Schedule::geometric(self.cfg.n_steps, DEFAULT_SCHEDULE_RATIO)?),
        )
    }

    fn window(&self) -> (f64, f64) {
        (self.cfg.check.window[0], self.cfg.check.window[1])
    }

    /// `α(θ0)` when it is known in closed form; `+∞` for a basis vector.
    fn alpha_theta(&self) -> Result<Option<f64>> {
        if self.cfg.theta0.basis.is_some() {
            return Ok(Some(f64::INFINITY));
        }
        match self.cfg.theta0.s {
            Some(s) if s > 0.5 => Ok(regularity(&self.spectrum, Some(s), &[])?.alpha_theta),
            _ => Ok(None),
        }
    }

    fn mean_rate(&self) -> Result<Outcome> {
        let chk = &self.cfg.check;
        let schedule = Schedule::geometric(self.cfg.n_steps, DEFAULT_SCHEDULE_RATIO)?;
        let mut rows = Vec::new();
        for &n in schedule.steps() {
            for &kappa in &self.cfg.betas {
                let mean = mean_iterate_phi(&self.theta0, &self.spectrum, self.gamma, n, kappa)?;
                let mut bound = f64::INFINITY;
                for &b in chk.bound_betas.iter().filter(|&&b| b > kappa) {
                    bound = bound.min(avg_upper_bound(&self.theta0, &self.spectrum, self.gamma, b, kappa, n)?);
                }
                rows.push(SeriesRow {
                    n,
                    beta: kappa,
                    mean,
                    stderr: 0.0,
                    bound,
                    replicas: 1,
                });
            }
        }

        let mut summary = Vec::new();
        let kappa = chk.kappa;
        let points: Vec<(f64, f64)> = schedule
            .steps()
            .iter()
            .map(|&n| Ok((n as f64, mean_iterate_phi(&self.theta0, &self.spectrum, self.gamma, n, kappa)?)))
            .collect::<Result<_>>()?;
        let rate = fit_decay_rate(&points, self.window())?;
        let alpha = self.alpha_theta()?;
        let expected = chk
            .expect_exponent
            .or(alpha.filter(|a| a.is_finite()).map(|a| -(a - kappa)));
        match expected {
            Some(e) => summary.push(SummaryRow::check(
                format!("rate exponent (kappa={kappa}, expected {e})"),
                rate.exponent,
                chk.tolerance,
                (rate.exponent - e).abs() <= chk.tolerance,
            )),
            None => summary.push(SummaryRow::info(format!("rate exponent (kappa={kappa})"), rate.exponent)),
        }
        summary.push(SummaryRow::info("rate stderr", rate.stderr));

        let ns: Vec<usize> = schedule.steps().iter().copied().filter(|&n| n > 0).collect();
        let betas: Vec<f64> = chk.bound_betas.iter().copied().filter(|&b| b > kappa).collect();
        if !betas.is_empty() {
            let c = check_avg_upper_bound(&self.theta0, &self.spectrum, self.gamma, &betas, kappa, &ns)?;
            summary.push(SummaryRow::from_bound(&c));
        }

        let t = match chk.probe_sequence.as_str() {
            "log-power" => SlowSequence::LogPower(chk.probe_eps),
            _ => SlowSequence::Power(chk.probe_eps),
        };
        for &beta in chk.probe_betas.iter().filter(|&&b| b > kappa) {
            let probe = lower_bound_probe(&self.theta0, &self.spectrum, self.gamma, beta, kappa, t, chk.probe_n_max)?;
            let name = format!("lower-bound probe growth (beta={beta})");
            let want = alpha.and_then(|a| {
                if beta > a {
                    Some(Verdict::Unbounded)
                } else if beta < a {
                    Some(Verdict::Bounded)
                } else {
                    None
                }
            });
            summary.push(match want {
                Some(v) => SummaryRow::check(
                    format!("{name}, expect {}", if v == Verdict::Unbounded { "unbounded" } else { "bounded" }),
                    probe.growth,
                    UNBOUNDED_GROWTH,
                    probe.verdict == v,
                ),
                None => SummaryRow::info(name, probe.growth),
            });
        }
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Series(rows),
            summary,
            diverged: Vec::new(),
        })
    }

    fn sgd_rate(&self) -> Result<Outcome> {
        let chk = &self.cfg.check;
        let mut betas = self.cfg.betas.clone();
        for b in [chk.kappa, chk.monotone_beta] {
            if !betas.contains(&b) {
                betas.push(b);
            }
        }
        let config = self.iteration(self.cfg.sampler, betas)?;
        let stats = ensemble(&config)?;
        let survivors = config.n_replicas - stats.diverged.len();
        let mut rows = Vec::new();
        for (k, &n) in stats.steps.iter().enumerate() {
            for (j, &beta) in stats.betas.iter().enumerate() {
                let e = stats.means[k][j];
                rows.push(SeriesRow {
                    n,
                    beta,
                    mean: e.mean,
                    stderr: e.stderr,
                    bound: mean_iterate_phi(&self.theta0, &self.spectrum, self.gamma, n, beta)?,
                    replicas: survivors,
                });
            }
        }

        let mut summary = Vec::new();
        if !stats.diverged.is_empty() {
            summary.push(SummaryRow::check("diverged replicas", stats.diverged.len() as f64, 0.0, false));
            return Ok(Outcome {
                experiment: self.cfg.experiment,
                results: Results::Series(rows),
                summary,
                diverged: stats.diverged,
            });
        }
        if self.cfg.sampler == SamplerKind::GammaSym {
            let c_beta = self.spectrum.k_sum(chk.beta_target) + 1.0;
            summary.push(SummaryRow::check("gamma * C_beta (must be < 2)", self.gamma * c_beta, 2.0, self.gamma * c_beta < 2.0));
        }
        let report = sgd_rate_report(&stats, &config, chk.beta_target, chk.kappa, self.window(), chk.slack)?;
        summary.push(SummaryRow::check(
            format!("rate exponent (kappa={})", chk.kappa),
            report.rate.exponent,
            report.threshold,
            report.rate_ok,
        ));
        summary.push(SummaryRow::info("rate stderr", report.rate.stderr));
        summary.push(SummaryRow::info("rate prefactor", report.rate.prefactor));
        summary.push(SummaryRow::check(
            "mean-iterate exponent (sandwich lower end)",
            report.mean_iterate_rate.exponent,
            report.rate.exponent + 2.0 * report.rate.stderr,
            report.sandwich_holds() || !report.rate_ok,
        ));
        let mut jensen = BoundCheck::new(format!("E phi_{k} >= mean-iterate phi_{k} - {}SE", chk.jensen_se, k = chk.kappa));
        let j = stats.beta_index(chk.kappa).expect("kappa recorded");
        for (n, e) in stats.series(j) {
            let det = mean_iterate_phi(&self.theta0, &self.spectrum, self.gamma, n, chk.kappa)?;
            jensen.record(e.mean + chk.jensen_se * e.stderr - det);
        }
        summary.push(SummaryRow::from_bound(&jensen));
        let j = stats.beta_index(chk.monotone_beta).expect("monotone beta recorded");
        let mut mono = check_nonincreasing(&stats.series(j), chk.monotone_se);
        mono.name = format!("nonincreasing phi_{}", chk.monotone_beta);
        summary.push(SummaryRow::from_bound(&mono));
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Series(rows),
            summary,
            diverged: Vec::new(),
        })
    }

    fn recursion(&self) -> Result<Outcome> {
        let chk = &self.cfg.check;
        let sampler = self.sampler(self.cfg.sampler);
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for &beta in &self.cfg.betas {
            let r = recursion_check(&self.theta0, &sampler, self.gamma, beta, chk.n_samples)?;
            rows.push(SeriesRow {
                n: 1,
                beta,
                mean: r.lhs.mean,
                stderr: r.lhs.stderr.hypot(r.rhs.stderr),
                bound: r.rhs.mean,
                replicas: if r.exact { 0 } else { chk.n_samples },
            });
            summary.push(if r.exact {
                SummaryRow::check(
                    format!("recursion relative gap (beta={beta}, exact)"),
                    r.relative_gap,
                    chk.exact_rel,
                    r.relative_gap <= chk.exact_rel,
                )
            } else {
                SummaryRow::check(
                    format!("recursion |lhs - rhs| / SE (beta={beta})"),
                    r.discrepancy_se,
                    chk.mc_se,
                    r.discrepancy_se <= chk.mc_se,
                )
            });
        }
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Series(rows),
            summary,
            diverged: Vec::new(),
        })
    }

    fn lemmas(&self) -> Result<Outcome> {
        let chk = &self.cfg.check;
        let mut checks = Vec::new();
        let mut summary = Vec::new();

        let mut f = BoundCheck::new("f_lambda");
        for m in [2.0, 5.0, 20.0, 100.0, 1000.0] {
            for tau in [0.1, 0.5, 1.0, 1.5, 2.0] {
                let r = f_lambda_verify(m, tau, chk.grid_size)?;
                if m == 20.0 && tau == 1.0 {
                    summary.push(SummaryRow::check("f(lambda*) at m=20 tau=1, lower", r.f_star, r.lower, r.f_star >= r.lower));
                    summary.push(SummaryRow::check("f(lambda*) at m=20 tau=1, upper", r.f_star, r.upper, r.f_star <= r.upper));
                }
                f.merge(&r.check);
            }
        }
        checks.push(f);
        let mut ext = BoundCheck::new("f_lambda_extended(m=200, eps=0.5)");
        for tau in [0.25, 0.5, 1.0, 1.5, 2.0] {
            ext.merge(&f_lambda_extended_verify(200.0, tau, 0.5, chk.grid_size)?);
        }
        checks.push(ext);

        let mus = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.49];
        let kappas = [0.25, 0.5, 1.0, 1.5, 2.0, 2.5];
        let g = gamma_series_verify(&mus, &kappas, chk.n_terms)?;
        summary.push(SummaryRow::info("gamma series min ratio", g.min_ratio));
        summary.push(SummaryRow::info("gamma series max ratio", g.max_ratio));
        summary.push(SummaryRow::check("gamma series envelope shift on doubling", g.envelope_shift, 0.01, g.envelope_shift <= 0.01));
        let mut worst_geo: f64 = 0.0;
        for &mu in &mus {
            let (s, _) = gamma_series(mu, 1.0, chk.n_terms)?;
            worst_geo = worst_geo.max((s - (1.0 - mu)).abs());
        }
        summary.push(SummaryRow::check("gamma series kappa=1 |ratio - (1-mu)|", worst_geo, 1e-12, worst_geo <= 1e-12));
        checks.push(g.check);

        let mut nr = neutral_recursion_verify(0.9, 0.5, 100_000)?;
        for (a0, w) in [(0.5, 1.0), (0.1, 2.0), (0.99, 0.1)] {
            nr.merge(&neutral_recursion_verify(a0, w, 10_000)?);
        }
        nr.name = "neutral_recursion".into();
        checks.push(nr);

        let triples = [(0.0, 0.5, 1.0), (-1.0, 0.3, 1.2), (0.5, 1.0, 2.0)];
        checks.push(holder_verify(&self.spectrum, chk.holder_random, &triples, self.cfg.seed)?);

        for &kind in &chk.samplers {
            let chain = moment_bound_verify(&self.sampler(kind), chk.n_samples)?;
            summary.push(SummaryRow::info(format!("C0 ({})", kind.name()), chain.c0.mean));
            checks.push(chain.check);
        }

        for &beta in &self.cfg.betas {
            checks.push(self.assumption3_check(beta)?.0);
        }

        summary.extend(checks.iter().map(SummaryRow::from_bound));
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Checks(checks),
            summary,
            diverged: Vec::new(),
        })
    }

    /// Per-probe agreement of the Monte Carlo ratio with its closed form, and
    /// the supremum against the known constant when one exists.
    fn assumption3_check(&self, beta: f64) -> Result<(BoundCheck, Vec<SeriesRow>, Option<(f64, f64)>)> {
        let chk = &self.cfg.check;
        let sampler = self.sampler(self.cfg.sampler);
        let probes = resolvable_probes(&sampler, chk.n_probes, chk.n_samples);
        let est = assumption3_constant(&sampler, beta, &probes, chk.n_samples)?;
        let k = chk.assumption3_se;
        let mut check = BoundCheck::new(format!("assumption3({}, beta={beta})", sampler.kind().name()));
        let mut rows = Vec::new();
        for p in &est.per_probe {
            check.record(k * p.ratio.stderr - (p.ratio.mean - p.analytic).abs());
            rows.push(SeriesRow {
                n: p.probe,
                beta,
                mean: p.ratio.mean,
                stderr: p.ratio.stderr,
                bound: p.analytic,
                replicas: chk.n_samples,
            });
        }
        let sup = est.analytic_constant.map(|c| {
            check.record(c + k * est.sup.ratio.stderr - est.sup.ratio.mean);
            (est.sup.ratio.mean, c)
        });
        Ok((check, rows, sup))
    }

    fn assumption3(&self) -> Result<Outcome> {
        let mut rows = Vec::new();
        let mut summary = Vec::new();
        for &beta in &self.cfg.betas {
            let (check, r, sup) = self.assumption3_check(beta)?;
            rows.extend(r);
            if let Some((s, c)) = sup {
                summary.push(SummaryRow::info(format!("sup ratio (beta={beta})"), s));
                summary.push(SummaryRow::info(format!("closed-form constant (beta={beta})"), c));
            }
            summary.push(SummaryRow::from_bound(&check));
        }
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Series(rows),
            summary,
            diverged: Vec::new(),
        })
    }

    fn as_convergence(&self) -> Result<Outcome> {
        let chk = &self.cfg.check;
        let config = self.iteration(self.cfg.sampler, vec![0.0])?;
        let stats = ensemble(&config)?;
        let survivors = config.n_replicas - stats.diverged.len();
        let mut rows = Vec::new();
        for (k, &n) in stats.steps.iter().enumerate() {
            let e = stats.means[k][0];
            rows.push(SeriesRow {
                n,
                beta: 0.0,
                mean: e.mean,
                stderr: e.stderr,
                bound: mean_iterate_phi(&self.theta0, &self.spectrum, self.gamma, n, 0.0)?,
                replicas: survivors,
            });
        }
        let mut summary = Vec::new();
        let sampler = &config.sampler;
        summary.push(SummaryRow::info("gamma", self.gamma));
        summary.push(SummaryRow::info("delta / E|x|^4", sampler.delta() / sampler.fourth_moment()));
        if let Some(m) = sampler.norm_bound() {
            summary.push(SummaryRow::info("2 / M", 2.0 / m));
        }
        if !stats.diverged.is_empty() {
            summary.push(SummaryRow::check("diverged replicas", stats.diverged.len() as f64, 0.0, false));
        }
        let non_monotone = stats.monotone.iter().filter(|&&m| !m).count();
        summary.push(SummaryRow::check(
            "replicas with an increase of |theta|^2",
            non_monotone as f64,
            0.0,
            non_monotone == 0,
        ));
        let start = self.theta0.norm_sq();
        let worst = stats.final_norm_sq.iter().fold(0.0_f64, |a, &b| if b.is_nan() { f64::NAN } else { a.max(b) });
        let ratio = worst / start;
        summary.push(SummaryRow::check(
            format!("max final |theta|^2 / |theta0|^2 at n={}", self.cfg.n_steps),
            ratio,
            chk.decay_factor,
            ratio < chk.decay_factor,
        ));

        if chk.martingale_replicas > 0 && !chk.martingale_steps.is_empty() {
            let kind = chk.martingale_sampler.unwrap_or(self.cfg.sampler);
            let n_max = chk.martingale_steps.iter().copied().max().unwrap_or(0) + 1;
            let mcfg = IterationConfig::new(self.sampler(kind), self.theta0.clone(), self.gamma, n_max)?
                .with_replicas(chk.martingale_replicas)
                .with_schedule(Schedule::explicit(&chk.martingale_steps, n_max)?);
            let m = martingale_diagnostic(&mcfg)?;
            for (&n, e) in m.steps.iter().zip(&m.means) {
                if !chk.martingale_steps.contains(&n) {
                    continue;
                }
                let z = e.z_score(0.0);
                summary.push(SummaryRow::check(
                    format!("martingale |mean M_n| / SE ({}, n={n})", kind.name()),
                    z,
                    chk.mc_se,
                    z <= chk.mc_se,
                ));
            }
        }
        Ok(Outcome {
            experiment: self.cfg.experiment,
            results: Results::Series(rows),
            summary,
            diverged: stats.diverged,
        })
    }
}
