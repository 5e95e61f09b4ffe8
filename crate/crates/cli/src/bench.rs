//! Desk-scale experiments on generated inputs, so no test images ship with
//! the tool.

use std::time::Instant;

use cct_core::convex::{BiconjugateOptions, ObermanOptions};
use cct_core::features::{mma, mu1, mu2, stable_ridge, support, DEFAULT_SUPPORT_LEVEL};
use cct_core::metrics::{psnr, rel_l2, support_hausdorff_error};
use cct_core::restore::denoise_salt_pepper;
use cct_core::{
    char_grid, upper_transform, Geometry, MaskGrid, ScalarGrid, Scheme, TransformParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::commands::{params, psnr_value, write_grid};
use crate::report::{num, Report};
use crate::{BenchOp, Failure, Opts};

pub fn run(op: BenchOp, opts: &Opts) -> Result<Report, Failure> {
    let start = Instant::now();
    let (name, value, p) = match op {
        BenchOp::Singleton => ("bench.singleton", singleton(opts)?, None),
        BenchOp::Corner => {
            let p = params(opts, opts.lambda.unwrap_or(8.0)).with_tau(opts.tau.unwrap_or(1.0));
            ("bench.corner", corner(opts, &p)?, Some(p))
        }
        BenchOp::MmaTwoPoint => {
            let p = params(opts, opts.lambda.unwrap_or(1.0));
            ("bench.mma-two-point", two_point(&p)?, Some(p))
        }
        BenchOp::SpNoise => {
            let mut p = params(opts, opts.lambda.unwrap_or(20.0));
            p.level_m = opts.level_m.unwrap_or(1e13);
            ("bench.sp-noise", sp_noise(opts, &p)?, Some(p))
        }
    };
    let mut report = Report::new(name, start).value(value);
    if let Some(p) = p {
        report = report.params_from(&p);
    }
    if let Some(n) = opts.size {
        report = report.param("size", n);
    }
    Ok(report.grid(opts.out.as_deref()).to(opts.report.as_deref()))
}

/// Upper transform of one marked cell against its closed form, every scheme.
fn singleton(opts: &Opts) -> Result<Value, Failure> {
    let lambda = opts.lambda.unwrap_or(0.01);
    let n = opts.size.unwrap_or(41) | 1;
    let geom = Geometry::centered(&[n, n], 1.0)?;
    let mut k = MaskGrid::empty(geom.clone());
    k.set(&[n / 2, n / 2], true);
    let chi = char_grid(&k, 1.0);
    let radius = 1.0 / lambda.sqrt();
    let exact = ScalarGrid::from_fn(geom, |x| {
        let d = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d < radius {
            lambda * (radius - d).powi(2)
        } else {
            0.0
        }
    })?;
    let exact_support = support(&exact, DEFAULT_SUPPORT_LEVEL);

    let mut rows = Map::new();
    for (name, scheme) in [
        ("moreau", Scheme::MoreauParabola),
        ("iter-moreau", Scheme::MoreauIterative { max_iters: None }),
        (
            "oberman",
            Scheme::Oberman(ObermanOptions {
                tol: opts.tol,
                stencil_radius: opts.stencil_radius,
                ..Default::default()
            }),
        ),
        (
            "biconj",
            Scheme::Biconjugate(BiconjugateOptions {
                dual_spacing: opts.dual_h,
                dual_bounds: None,
            }),
        ),
    ] {
        let t = Instant::now();
        let up = upper_transform(&chi, &TransformParams::new(lambda).with_scheme(scheme))?;
        let secs = t.elapsed().as_secs_f64();
        rows.insert(
            name.into(),
            json!({
                "e_inf": num(up.max_abs_diff(&exact)?),
                "e_h": num(support_hausdorff_error(&exact_support, &up, DEFAULT_SUPPORT_LEVEL)?),
                "seconds": num(secs),
            }),
        );
    }
    Ok(json!({ "lambda": num(lambda), "shape": [n, n], "schemes": rows }))
}

/// Stable-ridge heights at a straight boundary and at right-angle tips.
fn corner(opts: &Opts, p: &TransformParams) -> Result<Value, Failure> {
    let n = opts.size.unwrap_or(65) | 1;
    let h = 8.0 / (n - 1) as f64;
    let geom = Geometry::centered(&[n, n], h)?;
    let c = n / 2;
    let half = MaskGrid::from_fn(geom.clone(), |x| x[0] <= 0.0);
    let sr = stable_ridge(&half, p)?.grid;
    let boundary = (0..n)
        .flat_map(|j| [sr.get(&[c, j]), sr.get(&[c + 1, j])])
        .fold(0.0, f64::max);
    let wedge = MaskGrid::from_fn(geom.clone(), |x| x[0] <= -x[1].abs());
    let quadrant = MaskGrid::from_fn(geom, |x| x[0] <= 0.0 && x[1] <= 0.0);
    Ok(json!({
        "spacing": num(h),
        "half_plane_max": num(boundary),
        "mu1": num(mu1(p.lambda, p.tau)),
        "wedge_tip": num(stable_ridge(&wedge, p)?.grid.get(&[c, c])),
        "quadrant_tip": num(stable_ridge(&quadrant, p)?.grid.get(&[c, c])),
        "mu2": num(mu2(1.0, p.lambda, p.tau)),
    }))
}

/// Medial-axis map of two points 20 apart; the midpoint should read 100.
fn two_point(p: &TransformParams) -> Result<Value, Failure> {
    let geom = Geometry::centered(&[41, 21], 1.0)?;
    let mut k = MaskGrid::empty(geom);
    k.set(&[10, 10], true);
    k.set(&[30, 10], true);
    let map = mma(&k, p)?;
    Ok(json!({
        "midpoint": num(map.grid.get(&[20, 10])),
        "expected": 100.0,
        "max": num(map.grid.max()),
    }))
}

/// A smooth 8-bit scene with a few sharp-edged shapes, one pixel per unit.
fn synthetic_image(n: usize) -> Result<ScalarGrid, Failure> {
    let geom = Geometry::unit(&[n, n])?;
    let to_unit = |c: f64| 2.0 * c / n as f64 - 1.0;
    Ok(ScalarGrid::from_fn(geom, |x| {
        let (u, v) = (to_unit(x[0]), to_unit(x[1]));
        let mut y = 120.0 + 50.0 * (3.0 * u).sin() * (2.0 * v).cos() + 30.0 * u;
        if (u - 0.3).powi(2) + (v + 0.2).powi(2) < 0.12 {
            y += 60.0;
        }
        if u.abs() < 0.15 && v > 0.2 {
            y -= 70.0;
        }
        y.clamp(10.0, 245.0).round()
    })?)
}

fn sp_noise(opts: &Opts, p: &TransformParams) -> Result<Value, Failure> {
    let n = opts.size.unwrap_or(128);
    let clean = synthetic_image(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut values = clean.values().to_vec();
    let mut flags = vec![false; values.len()];
    for (v, f) in values.iter_mut().zip(flags.iter_mut()) {
        if rng.gen_bool(opts.noise.clamp(0.0, 1.0)) {
            *f = true;
            *v = if rng.gen_bool(0.5) { 255.0 } else { 0.0 };
        }
    }
    let noisy = ScalarGrid::new(clean.geometry().clone(), values)?;
    let noise = MaskGrid::new(clean.geometry().clone(), flags)?;
    let pad = opts.pad.unwrap_or(2);
    let out = denoise_salt_pepper(&noisy, &noise, p, pad)?;
    write_grid(&out, opts.out.as_deref())?;
    Ok(json!({
        "noise": num(opts.noise),
        "seed": opts.seed,
        "pad": pad,
        "noisy_psnr": psnr_value(psnr(&clean, &noisy, 255.0)?),
        "psnr": psnr_value(psnr(&clean, &out, 255.0)?),
        "eps_k": num(rel_l2(&clean, &out, Some(&noise.complement()))?),
    }))
}
