//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). The process exits with status
//! 0 after printing the report; set `BIMLAB_ACCEPTANCE_STRICT=1` to turn any
//! FAIL into a nonzero exit status.

mod common;

use std::time::Instant;

use bimlab::dataset::{generate_split, random_scene, rasterize, Cylinder, DatasetBundle, SceneParams, SceneSpec, Split};
use bimlab::error::FormatError;
use bimlab::forward::{solve_state, ForwardModel, StateSolve};
use bimlab::inverse::{
    assemble_observation, landweber_step, power_iteration, soft_threshold, tista, BornIterative, Regularizer,
    POWER_SEED,
};
use bimlab::io::{read_json, write_json};
use bimlab::linalg::{norm1, norm2, norm2_sqr, CVector};
use bimlab::nn::{
    check_parity, conv2d, load_bundle_set, maxpool2, upconv2, ParityVectors, UNet, UNetWeights,
};
use bimlab::report::step_rne;
use bimlab::special::bessel01;
use bimlab::{Complex64, ContrastImage, Error, MeasurementVector, ProblemConfig};
use common::*;
use rand::Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn special_functions() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for [x, j0, y0, j1, y1] in hankel_reference() {
        let b = bessel01(x).map_err(|e| e.to_string())?;
        let h0 = Complex64::new(j0, -y0);
        let h1 = Complex64::new(j1, -y1);
        let e0 = (b.hankel2_0() - h0).norm() / h0.norm();
        let e1 = (b.hankel2_1() - h1).norm() / h1.norm();
        let e = e0.max(e1);
        if e > worst.0 {
            worst = (e, x);
        }
    }
    check(
        worst.0 < 1e-9,
        format!("max rel. error {:.2e} (at x = {:.4e}) over 10^4 points in [1e-6, 1e4]", worst.0, worst.1),
    )
}

fn small_config() -> ProblemConfig {
    ProblemConfig {
        grid_nx: 8,
        grid_ny: 8,
        tx_count: 4,
        rx_count: 8,
        ..Default::default()
    }
}

fn forward_oracle() -> Outcome {
    let config = small_config();
    let model = ForwardModel::new(&config).map_err(|e| e.to_string())?;
    let mut rng = rng(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let t: CVector = (0..config.pixel_count())
            .map(|_| Complex64::from_polar(0.9 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>()))
            .collect();
        let t = ContrastImage::new(t, 8, 8).unwrap();
        let e_tot = solve_state(&model.ops, &t, &model.e_inc, StateSolve::accurate()).map_err(|e| e.to_string())?;
        let dense = dense_state_solve(&model.ops, &t, &model.e_inc);
        for (x, reference) in e_tot.per_tx.iter().zip(&dense) {
            worst = worst.max(rel_error_c(x.as_slice().unwrap(), reference));
        }
    }
    check(worst < 1e-8, format!("max rel. error {worst:.2e} vs dense LU over 50 scenes, |t| ≤ 0.9"))
}

fn centred_cylinder(config: &ProblemConfig, radius: f64, contrast: f64) -> ContrastImage {
    let scene = SceneSpec {
        cylinders: vec![Cylinder {
            center_x: 0.0,
            center_y: 0.0,
            radius,
            contrast,
        }],
        seed: 0,
    };
    rasterize(&scene, config)
}

fn born_limit() -> Outcome {
    let config = ProblemConfig::default();
    let model = ForwardModel::new(&config).map_err(|e| e.to_string())?;
    let gap = |contrast: f64| -> Result<f64, String> {
        let t = centred_cylinder(&config, 4.0 * config.pixel_size_m, contrast);
        let full = model.solve(&t).map_err(|e| e.to_string())?;
        let born = model.born(&t).map_err(|e| e.to_string())?;
        Ok(norm2((&full.data - &born.data).view()) / norm2(full.data.view()))
    };
    let g1 = gap(0.05)?;
    let g2 = gap(0.025)?;
    let ratio = g1 / g2;
    check(
        g1 < 0.05 && ratio >= 1.8,
        format!("gap {:.3}% at contrast 0.05, {:.3}% at 0.025, shrink ×{ratio:.3}", 100.0 * g1, 100.0 * g2),
    )
}

fn power_iteration_accuracy() -> Outcome {
    let shapes = [(24, 16), (64, 32), (128, 64), (256, 128), (512, 256)];
    let mut rng = rng(202);
    let (mut worst20, mut worst5, mut above) = (0.0f64, 0.0f64, 0usize);
    for k in 0..50 {
        let (m, n) = shapes[k % shapes.len()];
        let h = random_matrix(&mut rng, m, n);
        let truth = sigma_max(&h);
        let s20 = power_iteration(h.view(), 20, 1000 + k as u64).map_err(|e| e.to_string())?.sigma;
        let s5 = power_iteration(h.view(), 5, 2000 + k as u64).map_err(|e| e.to_string())?.sigma;
        worst20 = worst20.max((s20 - truth).abs() / truth);
        worst5 = worst5.max((s5 - truth).abs() / truth);
        if s20 > truth * (1.0 + 1e-9) || s5 > truth * (1.0 + 1e-9) {
            above += 1;
        }
    }
    check(
        worst20 < 0.01 && worst5 < 0.10 && above == 0,
        format!(
            "max rel. error {:.2}% (n_pow = 20, limit 1%), {:.2}% (n_pow = 5, limit 10%); estimates above σ_max: {above}; 50 iid complex Gaussian matrices up to 512×256",
            100.0 * worst20,
            100.0 * worst5
        ),
    )
}

fn ista_properties() -> Outcome {
    let mut rng = rng(303);
    let mut worst_rise = 0.0f64;
    for k in 0..100 {
        let (m, n) = if k % 2 == 0 { (48, 32) } else { (96, 64) };
        let h = bimlab::ObservationMatrix {
            h: random_matrix(&mut rng, m, n),
            bim_step: 1,
        };
        let truth: CVector = (0..n)
            .map(|_| if rng.random::<f64>() < 0.15 { complex_gaussian(&mut rng) } else { Complex64::new(0.0, 0.0) })
            .collect();
        let noise: CVector = (0..m).map(|_| 0.05 * complex_gaussian(&mut rng)).collect();
        let e = MeasurementVector::new(&h.h.dot(&truth) + &noise, 1, m).unwrap();
        let delta = 10f64.powf(rng.random_range(-3.0..0.0));
        let gamma = power_iteration(h.view(), 20, k).map_err(|e| e.to_string())?.gamma;
        let objective = |t: &ContrastImage| {
            norm2_sqr((h.apply(t) - &e.data).view()) + 2.0 * delta / gamma * norm1(t.t.view())
        };
        let mut t = ContrastImage::zeros(n, 1);
        let mut previous = objective(&t);
        for _ in 0..6 {
            t = tista(&h, &e, gamma, Regularizer::SoftThreshold(delta), 1, &t).map_err(|e| e.to_string())?;
            let current = objective(&t);
            worst_rise = worst_rise.max((current - previous) / previous);
            previous = current;
        }
    }

    let z: CVector = (0..64).map(|_| complex_gaussian(&mut rng)).collect();
    let zero = Complex64::new(0.0, 0.0);
    let identity = soft_threshold(&z, 0.0) == z;
    let below = soft_threshold(&z, z.iter().map(|v| v.norm()).fold(0.0, f64::max)).iter().all(|v| *v == zero)
        && soft_threshold(&CVector::from(vec![Complex64::new(0.3, 0.4)]), 0.5)[0] == zero
        && soft_threshold(&CVector::zeros(4), 0.3).iter().all(|v| *v == zero);
    let shrunk = soft_threshold(&z, 0.25);
    let phase = z.iter().zip(&shrunk).all(|(a, b)| {
        *b == zero || ((b / a).im.abs() < 1e-15 && ((a.norm() - b.norm()) - 0.25).abs() < 1e-14)
    });
    let closed = (soft_threshold(&CVector::from(vec![Complex64::new(0.3, 0.4)]), 0.1)[0] - Complex64::new(0.24, 0.32))
        .norm()
        < 1e-15;
    check(
        worst_rise <= 1e-12 && identity && below && phase && closed,
        format!(
            "largest relative objective increase {worst_rise:.1e} over 100 instances × 6 steps; soft-threshold identities: δ=0 {identity}, |z|≤δ→0 {below}, shrink/phase {phase}, closed form {closed}"
        ),
    )
}

fn reduction_equivalences() -> Outcome {
    let config = ProblemConfig::default();
    let solver = BornIterative::new(&config).map_err(|e| e.to_string())?;
    let model = solver.model();
    let params = SceneParams::for_config(&config);
    let mut tista_ok = 0;
    let mut bim_ok = 0;
    for seed in 0..10u64 {
        let scene = random_scene(&params, &config, 5000 + seed).map_err(|e| e.to_string())?;
        let e_mea = model.solve(&rasterize(&scene, &config)).map_err(|e| e.to_string())?;

        let run = solver.run(&e_mea, &vec![Regularizer::Identity; config.n_bim]).map_err(|e| e.to_string())?;

        let mut e_tot = model.e_inc.as_total();
        let mut t = ContrastImage::zeros(config.grid_nx, config.grid_ny);
        let mut trace_equal = true;
        let mut tista_equal = true;
        for i in 1..=config.n_bim {
            let h = assemble_observation(&model.ops, &e_tot, i).map_err(|e| e.to_string())?;
            let gamma = power_iteration(h.view(), config.n_pow, POWER_SEED + i as u64).map_err(|e| e.to_string())?.gamma;
            let start = t.clone();
            for l in 1..=config.n_lwb {
                t = landweber_step(&h, &t, &e_mea, gamma).map_err(|e| e.to_string())?;
                let via_tista = tista(&h, &e_mea, gamma, Regularizer::Identity, l, &start).map_err(|e| e.to_string())?;
                tista_equal &= via_tista == t;
            }
            trace_equal &= run.per_step[i - 1] == t && run.gammas[i - 1] == gamma;
            e_tot = solve_state(&model.ops, &t, &model.e_inc, StateSolve::fixed(config.n_bcg)).map_err(|e| e.to_string())?;
        }
        tista_ok += tista_equal as usize;
        bim_ok += trace_equal as usize;
    }
    check(
        tista_ok == 10 && bim_ok == 10,
        format!("bit-exact traces: tista(identity) vs Landweber {tista_ok}/10, BIM with identity regularizers vs plain Born–Landweber loop {bim_ok}/10"),
    )
}

fn sbim_end_to_end() -> Outcome {
    let config = ProblemConfig::default();
    let model = ForwardModel::new(&config).map_err(|e| e.to_string())?;
    let params = SceneParams::for_config(&config);
    let generated = generate_split(&model, &params, Split::Test, 200, 7, 200.0 / 2000.0).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    generated.save(dir.path()).map_err(|e| e.to_string())?;
    let data = DatasetBundle::load_for(dir.path(), &config).map_err(|e| e.to_string())?;
    if data.scenes != generated.scenes || data.contrasts != generated.contrasts || data.measurements != generated.measurements {
        return Err("reloaded split differs from the generated one".into());
    }

    let solver = BornIterative::from_model(model);
    let runs = (0..data.len())
        .into_par_iter()
        .map(|k| {
            let out = solver.sbim(&data.measurements[k])?;
            let rne = step_rne(&out.per_step, &data.contrasts[k])?;
            Ok((rne, out.misfits))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| e.to_string())?;

    let n = runs.len() as f64;
    let steps = config.n_bim;
    let mrne: Vec<f64> = (0..steps).map(|i| runs.iter().map(|r| r.0[i]).sum::<f64>() / n).collect();
    let misfit: Vec<f64> = (0..steps).map(|i| runs.iter().map(|r| r.1[i]).sum::<f64>() / n).collect();
    let finite = mrne.iter().all(|m| m.is_finite());
    let monotone = misfit.windows(2).all(|w| w[1] <= w[0]);

    let mut hard: Vec<f64> = data
        .scenes
        .iter()
        .zip(&runs)
        .filter(|(s, _)| s.cylinders.len() >= 2 && s.cylinders.iter().any(|c| c.contrast >= 0.5))
        .map(|(_, r)| r.0[steps - 1])
        .collect();
    hard.sort_by(f64::total_cmp);
    let median = if hard.is_empty() { f64::NAN } else { hard[hard.len() / 2] };
    let above_30 = hard.iter().filter(|r| **r > 30.0).count();
    let poor = median > 30.0;
    check(
        finite && monotone && poor,
        format!(
            "MRNE per step {:?} %, mean misfit {:?}, median final RNE {:.1}% on {} multi-target scenes with contrast ≥ 0.5 (expected > 30%; {} of them above 30%)",
            mrne.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
            misfit.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>(),
            median,
            hard.len(),
            above_30
        ),
    )
}

fn layer_oracles() -> Outcome {
    let mut rng = rng(404);
    let mut conv_err = 0.0f64;
    let mut up_err = 0.0f64;
    for (c, o, k, h, w) in [(3, 4, 3, 8, 8), (2, 16, 3, 32, 32), (16, 5, 1, 6, 10), (7, 3, 5, 9, 7)] {
        let x = random_tensor(&mut rng, c, h, w);
        let (kernel, bias) = random_kernel(&mut rng, o, c, k);
        let y = conv2d(&x, &kernel, &bias).map_err(|e| e.to_string())?;
        conv_err = conv_err.max(rel_error_f(&y.data, &naive_conv(&x, &kernel, &bias)));
    }
    for (c, o, h, w) in [(4, 3, 5, 6), (64, 32, 8, 8), (1, 1, 1, 1)] {
        let x = random_tensor(&mut rng, c, h, w);
        let (kernel, bias) = random_kernel(&mut rng, o, c, 2);
        let y = upconv2(&x, &kernel, &bias).map_err(|e| e.to_string())?;
        up_err = up_err.max(rel_error_f(&y.data, &scatter_upconv(&x, &kernel, &bias)));
    }
    let x = random_tensor(&mut rng, 5, 12, 8);
    let pooled = maxpool2(&x).map_err(|e| e.to_string())?;
    let mut pool_ok = true;
    for ch in 0..5 {
        for y in 0..6 {
            for xx in 0..4 {
                let block = [x.at(ch, 2 * y, 2 * xx), x.at(ch, 2 * y, 2 * xx + 1), x.at(ch, 2 * y + 1, 2 * xx), x.at(ch, 2 * y + 1, 2 * xx + 1)];
                let v = pooled.at(ch, y, xx);
                pool_ok &= block.iter().all(|&b| v >= b) && block.contains(&v);
            }
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let weights = UNetWeights::random(17);
    weights.save(dir.path()).map_err(|e| e.to_string())?;
    let round_trip = UNetWeights::load(dir.path()).map_err(|e| e.to_string())? == weights;
    let corrupt = corrupted_bundle_errors(dir.path())?;

    check(
        conv_err < 1e-6 && up_err < 1e-6 && pool_ok && round_trip && corrupt.is_empty(),
        format!(
            "conv rel. error {conv_err:.1e}, upconv {up_err:.1e}, block-max pooling {pool_ok}, bundle round trip {round_trip}, corrupted-bundle errors {}",
            if corrupt.is_empty() { "all distinct and correct".to_string() } else { corrupt.join("; ") }
        ),
    )
}

/// Damages copies of a saved bundle and collects any case whose load error
/// is not the expected one.
fn corrupted_bundle_errors(src: &std::path::Path) -> Result<Vec<String>, String> {
    let manifest: serde_json::Value = read_json(&src.join("manifest.json")).map_err(|e| e.to_string())?;
    let payload = std::fs::read(src.join("weights.bin")).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    type Edit = fn(&mut serde_json::Value, &mut Vec<u8>);
    let cases: [(&str, Edit, fn(&Error) -> bool); 5] = [
        (
            "missing out.conv",
            |m, _| m["tensors"].as_array_mut().unwrap().retain(|t| !t["name"].as_str().unwrap().starts_with("out.conv")),
            |e| matches!(e, Error::Format(FormatError::MissingTensor(n)) if n.starts_with("out.conv")),
        ),
        ("truncated payload", |_, p| p.truncate(p.len() - 4), |e| matches!(e, Error::Format(FormatError::TruncatedPayload { .. }))),
        (
            "shape mismatch",
            |m, _| m["tensors"][0]["shape"] = serde_json::json!([16, 2, 3, 2]),
            |e| matches!(e, Error::Format(FormatError::ShapeMismatch { .. })),
        ),
        ("unknown dtype", |m, _| m["tensors"][3]["dtype"] = "float16".into(), |e| matches!(e, Error::Format(FormatError::UnknownDtype { .. }))),
        (
            "unexpected tensor",
            |m, _| {
                let mut extra = m["tensors"][1].clone();
                extra["name"] = "enc3.conv1.bias".into();
                m["tensors"].as_array_mut().unwrap().push(extra);
            },
            |e| matches!(e, Error::Format(FormatError::UnexpectedTensor(_))),
        ),
    ];
    for (label, edit, expected) in cases {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (mut m, mut p) = (manifest.clone(), payload.clone());
        edit(&mut m, &mut p);
        write_json(&dir.path().join("manifest.json"), &m).map_err(|e| e.to_string())?;
        std::fs::write(dir.path().join("weights.bin"), &p).map_err(|e| e.to_string())?;
        match UNetWeights::load(dir.path()) {
            Err(e) if expected(&e) => {}
            Err(e) => problems.push(format!("{label}: wrong error `{e}`")),
            Ok(_) => problems.push(format!("{label}: loaded without error")),
        }
    }
    Ok(problems)
}

fn parity_gate() -> Outcome {
    let root = fixture("parity");
    let (_, weights) = load_bundle_set(&root, 1).map_err(|e| e.to_string())?;
    let net = UNet::from_weights(&weights[0]).map_err(|e| e.to_string())?;
    let vectors = ParityVectors::load(&root.join("vectors")).map_err(|e| e.to_string())?;
    let report = check_parity(&net, &vectors).map_err(|e| e.to_string())?;
    check(
        report.count == 100 && report.max_rel_error < 1e-4,
        format!(
            "{} vectors, max rel. error {:.2e}, mean {:.2e} against the PyTorch reference outputs",
            report.count, report.max_rel_error, report.mean_rel_error
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("special functions", special_functions),
        ("forward-model oracle equivalence", forward_oracle),
        ("Born-limit check", born_limit),
        ("power iteration", power_iteration_accuracy),
        ("ISTA properties", ista_properties),
        ("reduction equivalences", reduction_equivalences),
        ("SBIM end-to-end", sbim_end_to_end),
        ("nn layer oracles", layer_oracles),
        ("parity gate", parity_gate),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var_os("BIMLAB_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
