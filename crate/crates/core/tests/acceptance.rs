//! End-to-end acceptance checks, one line per criterion.
//!
//! Criterion 10 reads observed data from `CLIMIDX_ACCEPTANCE_DATA` (a directory
//! with `seasonal.csv` and `yields.csv`) and is skipped when it is unset.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use climidx_core::evaluation::{
    explained_variance_table, make_splits, regional_averages, run_matrix, CvPlan, DataBundle, MatrixRequest,
    AVERAGE_LABEL, MIN_TRAIN,
};
use climidx_core::indices::{composite_aci, daily_cdd, daily_hdd};
use climidx_core::ingest::{Crop, Season, SeasonalObservation, SeasonalTable, Variable, YieldTable};
use climidx_core::models::{fit_gbt, fit_glm, GbtParams, GlmFamily, Growth, Method};
use climidx_core::preprocess::{
    build_design_matrix, default_max_lag, linear_detrend, model_spec, ols_trend, pca, reduce, Reducer,
};
use climidx_core::pricing::{
    call_payoff, hba_price, im_price, price, DetrendMode, OptionContract, PricingMethod, PricingOptions,
};
use climidx_core::stats::{ad_two_sample, adf_test, spearman_rho, Family};
use climidx_core::synthetic::{generate, SyntheticConfig};
use climidx_core::Execution;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

const DATA_ENV: &str = "CLIMIDX_ACCEPTANCE_DATA";
const SINGLE_VARIABLE_SPECS: [u8; 7] = [1, 2, 3, 8, 9, 10, 22];

enum Outcome {
    Pass(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome::Pass(detail.into())
}

fn synthetic_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn bundled() -> DataBundle {
    let dir = synthetic_dir();
    DataBundle {
        seasonal: SeasonalTable::load(&dir.join("seasonal.csv")).unwrap(),
        yields: YieldTable::load(&dir.join("yields.csv")).unwrap(),
    }
}

fn complete_years(seasonal: &SeasonalTable, region: &str) -> Vec<i32> {
    let vars = seasonal.variables();
    let mut years: Vec<i32> = seasonal.iter().filter(|r| r.region == region).map(|r| r.year).collect();
    years.sort_unstable();
    years.dedup();
    years.retain(|&y| {
        vars.iter()
            .all(|&v| Season::ALL.iter().all(|&s| seasonal.get(region, v, y, s).is_some()))
    });
    years
}

fn within(elapsed: Duration, limit: Duration) {
    assert!(elapsed < limit, "took {elapsed:?}, limit {limit:?}");
}

fn index_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let tmin: f64 = rng.random_range(-40.0..100.0);
        let tmax = tmin + rng.random_range(0.0..40.0);
        let t = (tmax + tmin) / 2.0;
        let (cdd, hdd) = (daily_cdd(t, 65.0), daily_hdd(t, 65.0));
        assert_eq!(cdd + hdd, (t - 65.0).abs(), "tmax {tmax} tmin {tmin}");
        assert_eq!(cdd.min(hdd), 0.0);
    }
    let zeros = Variable::ACI_COMPONENTS.iter().flat_map(|&variable| {
        [(2000, Season::Winter), (2000, Season::Summer), (2001, Season::Spring)].map(|(year, season)| {
            SeasonalObservation {
                region: "R".into(),
                variable,
                year,
                season,
                value: 0.0,
            }
        })
    });
    let aci = composite_aci(&SeasonalTable::from_rows(zeros).unwrap(), "R").unwrap();
    assert_eq!(aci.len(), 3);
    assert!(aci.iter().all(|r| r.value == 0.0));
    within(start.elapsed(), Duration::from_secs(1));
    pass("10000 pairs exact, zero composite")
}

fn detrend_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(10..=80);
        let level: f64 = rng.random_range(20.0..200.0);
        let slope = level * rng.random_range(-0.005..0.02);
        let noise = Normal::new(0.0, 0.08 * level).unwrap();
        let y: Vec<f64> = (0..n)
            .map(|t| (level + slope * t as f64 + noise.sample(&mut rng)).max(0.05 * level))
            .collect();
        let r = linear_detrend(&y).unwrap();
        for (i, ((d, t), v)) in r.dy.iter().zip(&r.tt).zip(&y).enumerate() {
            assert_eq!((d + t).to_bits(), v.to_bits(), "index {i}");
        }
        let (_, again) = ols_trend(&r.dy);
        worst = worst.max(again.abs());
    }
    assert!(worst < 1e-9, "re-detrended slope {worst}");
    pass(format!("1000 series, max residual slope {worst:.1e}"))
}

/// Standardized columns, covariance eigenpairs in descending order, loadings
/// signed so the largest-magnitude entry is positive.
fn pca_oracle(x: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>) {
    let (n, p) = x.shape();
    let mut z = x.clone();
    for j in 0..p {
        let m = x.column(j).mean();
        let sd = (x.column(j).iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        z.column_mut(j).iter_mut().for_each(|v| *v = (*v - m) / sd);
    }
    let cov = z.transpose() * &z / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mut v = DMatrix::zeros(p, k);
    for (c, &i) in order.iter().take(k).enumerate() {
        let col = eig.eigenvectors.column(i);
        let big = col
            .iter()
            .copied()
            .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        v.set_column(c, &(col * big.signum()));
    }
    let ratios = order.iter().map(|&i| eig.eigenvalues[i].max(0.0) / total).collect();
    (z * v, ratios)
}

fn pca_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for (n, p, k) in [(5, 3, 3), (64, 24, 4)] {
        // correlated columns keep the leading eigenvalues well separated
        let latent = DMatrix::<f64>::from_fn(n, 3, |_, _| rng.sample(StandardNormal));
        let mix = DMatrix::<f64>::from_fn(3, p, |_, _| rng.sample(StandardNormal));
        let noise = DMatrix::<f64>::from_fn(n, p, |_, _| 0.5 * rng.sample::<f64, _>(StandardNormal));
        let x = latent * mix + noise;
        let got = pca(&x, k).unwrap();
        let (scores, ratios) = pca_oracle(&x, k);
        worst = worst.max((&got.scores - &scores).amax());
        for (a, b) in got.explained_ratio_all.iter().zip(&ratios) {
            worst = worst.max((a - b).abs());
        }
        let sum: f64 = got.explained_ratio_all.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "{n}x{p}: ratios sum to {sum}");
    }
    assert!(worst < 1e-9, "max deviation {worst:.2e}");
    pass(format!("5x3 and 64x24, max deviation {worst:.1e}"))
}

fn single_variable_explained() -> Outcome {
    let bundled = bundled().seasonal;
    let fresh = generate(&SyntheticConfig {
        seed: 7,
        ..Default::default()
    })
    .seasonal;
    let mut checked = 0;
    for (name, table) in [("bundled", &bundled), ("seed 7", &fresh)] {
        for region in table.regions() {
            let years = complete_years(table, &region);
            let rows = explained_variance_table(table, &region, &years, None, Execution::Parallel).unwrap();
            for r in rows.iter().filter(|r| SINGLE_VARIABLE_SPECS.contains(&r.model_id)) {
                for (reducer, total) in [("pca", r.pca_total), ("fpca", r.fpca_total)] {
                    assert!(
                        (total - 1.0).abs() < 1e-9,
                        "{name} {region} model {} {reducer}: {total}",
                        r.model_id
                    );
                }
                checked += 1;
            }
        }
    }
    pass(format!("{checked} (dataset, region, spec) cells at 100%"))
}

fn glm_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let beta = [4.0, 0.3, -0.2, 0.1];
    let x = DMatrix::<f64>::from_fn(60, 3, |_, _| rng.sample(StandardNormal));
    let y: Vec<f64> = (0..60)
        .map(|i| (beta[0] + (0..3).map(|j| beta[j + 1] * x[(i, j)]).sum::<f64>()).exp())
        .collect();
    let fit = fit_glm(&x, &y, GlmFamily::Normal).unwrap();
    let err = fit
        .beta
        .iter()
        .zip(beta)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "coefficient error {err}");

    let shock = Normal::<f64>::new(0.0, 0.1).unwrap();
    let noisy: Vec<f64> = y.iter().map(|v| v * shock.sample(&mut rng).exp()).collect();
    for (family, fit) in [
        (GlmFamily::Normal, fit.clone()),
        (GlmFamily::Gamma, fit_glm(&x, &noisy, GlmFamily::Gamma).unwrap()),
        (GlmFamily::Normal, fit_glm(&x, &noisy, GlmFamily::Normal).unwrap()),
    ] {
        assert!(
            fit.deviance_path.windows(2).all(|w| w[1] <= w[0]),
            "{family:?} deviance path {:?}",
            fit.deviance_path
        );
    }
    pass(format!("max coefficient error {err:.1e}"))
}

fn gbt_descent() -> Outcome {
    let bundle = bundled();
    let mut rounds = 0;
    for crop in Crop::ALL {
        let (years, y): (Vec<i32>, Vec<f64>) = bundle.yields.series(crop, "MID").into_iter().unzip();
        let dy = linear_detrend(&y).unwrap().dy;
        let design = build_design_matrix(&model_spec(22).unwrap(), &bundle.seasonal, "MID", &years).unwrap();
        let scores = reduce(&design, Reducer::Fpca, None).unwrap().scores;
        for growth in [Growth::Levelwise, Growth::Leafwise] {
            let params = GbtParams {
                reg_gamma: 0.0,
                ..GbtParams::new(growth)
            };
            assert_eq!(params.n_estimators, 500);
            let ens = fit_gbt(&scores, &dy, params).unwrap();
            assert_eq!(ens.objective_path.len(), 501);
            for (i, w) in ens.objective_path.windows(2).enumerate() {
                assert!(w[1] <= w[0], "{crop} {growth:?} round {}: {} > {}", i + 1, w[1], w[0]);
            }
            rounds += 500;

            let empty = fit_gbt(
                &scores,
                &dy,
                GbtParams {
                    n_estimators: 0,
                    ..params
                },
            )
            .unwrap();
            let mean = dy.iter().sum::<f64>() / dy.len() as f64;
            assert!(empty.predict(&scores).unwrap().iter().all(|p| *p == mean));
        }
    }
    pass(format!("{rounds} rounds non-increasing, empty ensemble = mean"))
}

fn cv_plan() -> Outcome {
    let splits = make_splits(&CvPlan::new(64, 5, 6).unwrap()).unwrap();
    let want: [(usize, usize); 5] = [(58, 64), (52, 58), (46, 52), (40, 46), (34, 40)];
    assert_eq!(splits.len(), 5);
    for (s, (train_end, test_end)) in splits.iter().zip(want) {
        assert_eq!(s.train, (0..train_end).collect::<Vec<_>>(), "split {}", s.index);
        assert_eq!(s.test, (train_end..test_end).collect::<Vec<_>>(), "split {}", s.index);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut plans = 0;
    while plans < 1000 {
        let n = rng.random_range(MIN_TRAIN + 1..=200);
        let m = rng.random_range(1..=10);
        let k = rng.random_range(1..=n);
        if n < MIN_TRAIN + m * k {
            assert!(CvPlan::new(n, m, k).is_err(), "({n}, {m}, {k}) accepted");
            continue;
        }
        let splits = make_splits(&CvPlan::new(n, m, k).unwrap()).unwrap();
        assert_eq!(splits.len(), m);
        for s in &splits {
            assert_eq!(s.test.len(), k);
            assert!(s.train.len() >= MIN_TRAIN);
            assert!(
                s.train.iter().all(|i| !s.test.contains(i)),
                "({n}, {m}, {k}) split {}",
                s.index
            );
            assert!(s.train.iter().chain(&s.test).all(|&i| i < n));
        }
        plans += 1;
    }
    pass("64/5/6 splits exact, 1000 random plans disjoint")
}

/// `E[α (X − K)⁺]` for `ln X ~ N(μ, σ²)`.
fn lognormal_call(mu: f64, sigma: f64, strike: f64, alpha: f64) -> f64 {
    let phi = StatNormal::standard();
    let d1 = (mu + sigma * sigma - strike.ln()) / sigma;
    let d2 = d1 - sigma;
    alpha * ((mu + sigma * sigma / 2.0).exp() * phi.cdf(d1) - strike * phi.cdf(d2))
}

fn pricing_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..10_000 {
        let n = rng.random_range(10..=70);
        let loc: f64 = rng.random_range(-50.0..2000.0);
        let spread: f64 = rng.random_range(0.1..300.0);
        let index: Vec<f64> = (0..n)
            .map(|_| loc + spread * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let alpha: f64 = rng.random_range(1.0..500.0);
        let contract = OptionContract::new("c", (0..n).collect(), index.clone(), alpha).unwrap();
        let r = hba_price(&contract, false).unwrap();

        let mean = r.payoffs_hba.iter().sum::<f64>() / n as f64;
        assert_eq!(r.fair_price_hba, mean, "case {case}");

        let mut pairs: Vec<(f64, f64)> = index.iter().copied().zip(r.payoffs_hba.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(
            pairs.windows(2).all(|w| w[0].1 <= w[1].1),
            "case {case}: payoff not monotone"
        );

        let c = [0.25, 0.5, 2.0, 4.0][case % 4];
        let scaled = hba_price(
            &OptionContract {
                tick_alpha: alpha * c,
                ..contract.clone()
            },
            false,
        )
        .unwrap();
        assert_eq!(
            scaled.fair_price_hba,
            c * r.fair_price_hba,
            "case {case}: alpha scaling"
        );

        let k2 = r.strike + rng.random_range(0.0..spread);
        let higher = index.iter().map(|&i| call_payoff(i, k2, alpha)).sum::<f64>() / n as f64;
        assert!(higher <= r.fair_price_hba, "case {case}: strike monotonicity");
    }

    let ln = LogNormal::new(5.0, 0.25).unwrap();
    let mut series_rng = ChaCha8Rng::seed_from_u64(2024);
    let index: Vec<f64> = (0..64).map(|_| ln.sample(&mut series_rng)).collect();
    let contract = OptionContract::new("ln", (1961..2025).collect(), index, 100.0).unwrap();
    let r = im_price(&contract, &[Family::Lognormal], 1000, 0, false).unwrap();
    let fit = r.fit.as_ref().unwrap();
    let (mu, sigma) = (fit.params[0], fit.params[1]);
    let exact = lognormal_call(mu, sigma, r.strike, 100.0);
    let draws = LogNormal::new(mu, sigma).unwrap();
    let mut oracle_rng = ChaCha8Rng::seed_from_u64(99);
    let oracle = (0..1_000_000)
        .map(|_| call_payoff(draws.sample(&mut oracle_rng), r.strike, 100.0))
        .sum::<f64>()
        / 1_000_000.0;
    assert!(
        (oracle / exact - 1.0).abs() < 0.01,
        "oracle {oracle} vs closed form {exact}"
    );
    let im = r.fair_price_im.unwrap();
    let rel = (im / oracle - 1.0).abs();
    assert!(rel < 0.10, "IM {im} vs oracle {oracle}");
    within(start.elapsed(), Duration::from_secs(10));
    pass(format!("10000 contracts exact, IM off oracle by {:.1}%", 100.0 * rel))
}

fn statistical_calibration() -> Outcome {
    let lag = default_max_lag(200);
    let mut noise_rejects = 0;
    let mut walk_rejects = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let e: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
        if adf_test(&e, lag).unwrap().p_value < 0.05 {
            noise_rejects += 1;
        }
        let walk: Vec<f64> = e
            .iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect();
        if adf_test(&walk, lag).unwrap().p_value < 0.05 {
            walk_rejects += 1;
        }
    }
    assert!(noise_rejects >= 95, "white noise rejected {noise_rejects}/100");
    assert!(100 - walk_rejects >= 90, "random walks rejected {walk_rejects}/100");

    let mut false_rejects = 0;
    for seed in 0..100 {
        let mut a = ChaCha8Rng::seed_from_u64(5000 + 2 * seed);
        let mut b = ChaCha8Rng::seed_from_u64(5001 + 2 * seed);
        let d = Normal::new(10.0, 3.0).unwrap();
        let x: Vec<f64> = (0..64).map(|_| d.sample(&mut a)).collect();
        let y: Vec<f64> = (0..64).map(|_| d.sample(&mut b)).collect();
        if ad_two_sample(&x, &y).unwrap().p_value < 0.05 {
            false_rejects += 1;
        }
    }
    assert!(false_rejects <= 12, "A-D false rejections {false_rejects}/100");
    pass(format!(
        "ADF noise {noise_rejects}/100, walks kept {}/100, A-D false rejections {false_rejects}/100",
        100 - walk_rejects
    ))
}

fn observed_data() -> Outcome {
    let Some(dir) = std::env::var_os(DATA_ENV).map(PathBuf::from) else {
        return Outcome::Skip(format!("{DATA_ENV} not set"));
    };
    let bundle = DataBundle {
        seasonal: SeasonalTable::load(&dir.join("seasonal.csv")).unwrap(),
        yields: YieldTable::load(&dir.join("yields.csv")).unwrap(),
    };
    let aligned = |a: Variable, b: Variable, region: &str, season: Season| {
        let sb = bundle.seasonal.series(region, b, season);
        let (years, xs, ys): (Vec<i32>, Vec<f64>, Vec<f64>) = bundle
            .seasonal
            .series(region, a, season)
            .into_iter()
            .filter_map(|(y, v)| sb.iter().find(|(yb, _)| *yb == y).map(|(_, w)| (y, v, *w)))
            .fold((vec![], vec![], vec![]), |mut acc, (y, v, w)| {
                acc.0.push(y);
                acc.1.push(v);
                acc.2.push(w);
                acc
            });
        (years, xs, ys)
    };
    let opts = PricingOptions {
        method: PricingMethod::Hba,
        detrend: DetrendMode::Auto,
        ..Default::default()
    };
    let cases = [
        (
            "SWP",
            Season::Summer,
            Variable::Cdd,
            Variable::T90,
            0.97,
            0.02,
            0.82,
            [2192.23, 34.74],
        ),
        (
            "SPL",
            Season::Spring,
            Variable::Pre,
            Variable::P,
            0.69,
            0.03,
            0.65,
            [36.34, 40.61],
        ),
    ];
    let mut notes = Vec::new();
    for (region, season, a, b, rho, tol, payoff_rho, prices) in cases {
        let (years, xs, ys) = aligned(a, b, region, season);
        let r = spearman_rho(&xs, &ys).unwrap();
        assert!((r - rho).abs() <= tol, "{region} index rho {r}");
        let pa = price(
            &OptionContract::new(a.as_str(), years.clone(), xs, 100.0).unwrap(),
            &opts,
        )
        .unwrap();
        let pb = price(&OptionContract::new(b.as_str(), years, ys, 100.0).unwrap(), &opts).unwrap();
        let pr = spearman_rho(&pa.payoffs_hba, &pb.payoffs_hba).unwrap();
        assert!((pr - payoff_rho).abs() <= 0.05, "{region} payoff rho {pr}");
        for (got, want) in [pa.fair_price_hba, pb.fair_price_hba].into_iter().zip(prices) {
            assert!((got / want - 1.0).abs() <= 0.01, "{region} fair price {got} vs {want}");
        }
        notes.push(format!("{region} rho {r:.2}"));
    }

    let regions: Vec<String> = bundle
        .yields
        .iter()
        .map(|r| r.region)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    for crop in Crop::ALL {
        let mut req = MatrixRequest::full(crop, &regions[0], Reducer::Fpca);
        req.regions = regions.clone();
        let report = run_matrix(&bundle, &req).unwrap();
        let avg = |m: Method| {
            regional_averages(&report.reports)
                .into_iter()
                .find(|a| a.region == AVERAGE_LABEL && a.method == m)
                .map(|a| a.mape_train)
                .unwrap()
        };
        let (xgb, lgbm, gam, glm) = (avg(Method::Xgb), avg(Method::Lgbm), avg(Method::Gam), avg(Method::Glm));
        assert!(
            xgb < lgbm && lgbm < gam && gam <= glm,
            "{crop}: XGB {xgb} LGBM {lgbm} GAM {gam} GLM {glm}"
        );
    }
    notes.push("MAPE ordering holds".into());
    pass(notes.join(", "))
}

fn full_synthetic_matrix() -> Outcome {
    let bundle = bundled();
    let req = MatrixRequest::full(Crop::Corn, "MID", Reducer::Fpca);
    let start = Instant::now();
    let first = run_matrix(&bundle, &req).unwrap();
    let elapsed = start.elapsed();
    let second = run_matrix(&bundle, &req).unwrap();
    assert!(first.failures.is_empty(), "{:?}", first.failures);
    assert_eq!(first.reports.len(), 88);
    assert_eq!(first, second);
    within(elapsed, Duration::from_secs(300));
    pass(format!("88 cells in {:.1}s, identical rerun", elapsed.as_secs_f64()))
}

fn main() {
    let checks: [(&str, Check); 11] = [
        ("index identities", index_identities),
        ("detrend round trip", detrend_round_trip),
        ("PCA oracle equivalence", pca_oracle_equivalence),
        ("single-variable explained variance", single_variable_explained),
        ("GLM recovery", glm_recovery),
        ("GBT descent", gbt_descent),
        ("CV plan", cv_plan),
        ("pricing properties", pricing_properties),
        ("statistical calibration", statistical_calibration),
        ("observed-data reproduction", observed_data),
        ("full synthetic end-to-end", full_synthetic_matrix),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let line = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(Outcome::Pass(d)) => format!("PASS  {:>2} {name}: {d}", i + 1),
            Ok(Outcome::Skip(d)) => format!("SKIP  {:>2} {name}: {d}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                format!("FAIL  {:>2} {name}: {msg}", i + 1)
            }
        };
        println!("{line}");
    }
    let _ = panic::take_hook();
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
