use std::path::{Path, PathBuf};
use std::time::Instant;

use cct_core::convex::{BiconjugateOptions, ObermanOptions};
use cct_core::features::{self, DEFAULT_MARKER_RATIO, DEFAULT_SUPPORT_LEVEL};
use cct_core::io::{self, GridFormat};
use cct_core::metrics::{hausdorff, psnr, rel_l2, support_hausdorff_error};
use cct_core::moreau::squared_distance_transform;
use cct_core::restore::{self, detect_extreme_values};
use cct_core::transform::Padding;
use cct_core::{
    lower_transform, mixed_lu, mixed_ul, upper_transform, FeatureMap, MaskGrid, Psnr, SampleField,
    ScalarGrid, Scheme, TransformParams,
};
use serde_json::{json, Value};

use crate::report::{num, Report};
use crate::{CctOp, DistOp, Failure, FeatureOp, MetricOp, Opts, RestoreOp, SchemeArg};

type Outcome = Result<Report, Failure>;

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
}

fn lambda(opts: &Opts, default: Option<f64>) -> Result<f64, Failure> {
    opts.lambda
        .or(default)
        .ok_or_else(|| Failure::Usage("--lambda is required".into()))
}

pub fn scheme(opts: &Opts) -> Scheme {
    match opts.scheme {
        SchemeArg::Moreau => Scheme::MoreauParabola,
        SchemeArg::IterMoreau => Scheme::MoreauIterative {
            max_iters: opts.max_iters,
        },
        SchemeArg::Oberman => {
            let mut o = ObermanOptions {
                tol: opts.tol,
                stencil_radius: opts.stencil_radius,
                ..Default::default()
            };
            if let Some(n) = opts.max_iters {
                o.max_iters = n;
            }
            Scheme::Oberman(o)
        }
        SchemeArg::Biconj => Scheme::Biconjugate(BiconjugateOptions {
            dual_spacing: opts.dual_h,
            dual_bounds: None,
        }),
    }
}

pub fn params(opts: &Opts, lambda: f64) -> TransformParams {
    let mut p = TransformParams::new(lambda).with_scheme(scheme(opts));
    if let Some(tau) = opts.tau {
        p = p.with_tau(tau);
    }
    if let Some(m) = opts.level_m {
        p = p.with_level(m);
    }
    if let Some(w) = opts.pad {
        p = p.with_padding(Padding::mirror(w));
    }
    p
}

fn is_pgm(path: &Path) -> bool {
    GridFormat::from_path(path) == Some(GridFormat::Pgm)
}

pub fn write_grid(g: &ScalarGrid, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(io::write_grid(g, p, None)?),
        None => Ok(()),
    }
}

/// Masks go out as 255 in images and 1 in numeric formats.
pub fn write_mask(m: &MaskGrid, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(io::write_mask(
            m,
            p,
            None,
            if is_pgm(p) { 255.0 } else { 1.0 },
        )?),
        None => Ok(()),
    }
}

pub fn cct(op: CctOp, opts: &Opts) -> Outcome {
    let start = Instant::now();
    let input = required(&opts.input, "in")?;
    let g = io::read_grid(input, None)?;
    let p = params(opts, lambda(opts, None)?);
    let (name, out) = match op {
        CctOp::Lower => ("cct.lower", lower_transform(&g, &p)?),
        CctOp::Upper => ("cct.upper", upper_transform(&g, &p)?),
        CctOp::MixedUl => ("cct.mixed-ul", mixed_ul(&g, &p)?),
        CctOp::MixedLu => ("cct.mixed-lu", mixed_lu(&g, &p)?),
    };
    write_grid(&out, opts.out.as_deref())?;
    Ok(Report::new(name, start)
        .value(json!({ "min": num(out.min()), "max": num(out.max()), "sup_change": num(out.max_abs_diff(&g)?) }))
        .params_from(&p)
        .grid(Some(input))
        .grid(opts.out.as_deref())
        .to(opts.report.as_deref()))
}

/// Feature maps are unit-amplitude; images are stretched to 0..255 for
/// viewing, numeric formats keep the raw values.
fn write_feature(map: &FeatureMap, out: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = out else { return Ok(()) };
    if is_pgm(path) {
        let top = map.grid.max_abs();
        let scale = if top > 0.0 { 255.0 / top } else { 0.0 };
        io::write_grid(&map.grid.map(|v| v.abs() * scale), path, None)?;
    } else {
        io::write_grid(&map.grid, path, None)?;
    }
    let sidecar = json!({
        "kind": map.kind,
        "params": map.params,
        "shape": map.grid.shape(),
        "max": num(map.grid.max()),
        "min": num(map.grid.min()),
    });
    let side = sidecar_path(path);
    std::fs::write(
        &side,
        serde_json::to_string_pretty(&sidecar).expect("sidecar serialises") + "\n",
    )
    .map_err(|e| Failure::Output(format!("{}: {e}", side.display())))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn feature(op: FeatureOp, opts: &Opts) -> Outcome {
    let start = Instant::now();
    let input = required(&opts.input, "in")?;
    if let FeatureOp::Suplevel = op {
        return suplevel(opts, input, start);
    }
    let p = params(opts, lambda(opts, None)?);
    let map = match op {
        FeatureOp::Ridge => features::ridge(&io::read_grid(input, None)?, &p)?,
        FeatureOp::Valley => features::valley(&io::read_grid(input, None)?, &p)?,
        FeatureOp::Edge => features::edge(&io::read_grid(input, None)?, &p)?,
        _ => {
            let k = io::read_mask(input, None)?;
            match op {
                FeatureOp::Sr => features::stable_ridge(&k, &p)?,
                FeatureOp::Sv => features::stable_valley(&k, &p)?,
                FeatureOp::Se => features::stable_edge(&k, &p)?,
                FeatureOp::D2 => features::d2_lambda(&k, &p)?,
                FeatureOp::Corner => features::interior_corner_map(&k, &p)?,
                FeatureOp::Intersect => features::intersection_transform(&k, &p)?,
                FeatureOp::Mma => features::mma(&k, &p)?,
                _ => unreachable!("grid features handled above"),
            }
        }
    };
    write_feature(&map, opts.out.as_deref())?;
    let mut value = json!({ "max": num(map.grid.max()), "min": num(map.grid.min()) });
    let mut report = Report::new(format!("feature.{}", kind_name(&map)), start);
    if let FeatureOp::Intersect = op {
        let ratio = opts.threshold.unwrap_or(DEFAULT_MARKER_RATIO);
        let markers = features::intersection_markers(&map, ratio);
        if let Some(path) = &opts.markers {
            io::write_markers(&markers, path)?;
        }
        value["markers"] = json!(markers);
        report = report.param("marker_ratio", ratio);
    }
    Ok(report
        .value(value)
        .params_from(&p)
        .grid(Some(input))
        .grid(opts.out.as_deref())
        .grid(opts.markers.as_deref())
        .to(opts.report.as_deref()))
}

fn kind_name(map: &FeatureMap) -> String {
    serde_json::to_value(map.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn suplevel(opts: &Opts, input: &Path, start: Instant) -> Outcome {
    let g = io::read_grid(input, None)?;
    let (mask, alpha) = match (opts.threshold, opts.relative) {
        (None, _) => (
            features::support(&g, DEFAULT_SUPPORT_LEVEL),
            DEFAULT_SUPPORT_LEVEL * g.max(),
        ),
        (Some(t), true) => (features::suplevel_grid(&g, t * g.max()), t * g.max()),
        (Some(t), false) => (features::suplevel_grid(&g, t), t),
    };
    write_mask(&mask, opts.out.as_deref())?;
    Ok(Report::new("feature.suplevel", start)
        .value(json!({ "cells": mask.count(), "level": num(alpha) }))
        .param("threshold", opts.threshold)
        .param("relative", opts.relative)
        .grid(Some(input))
        .grid(opts.out.as_deref())
        .to(opts.report.as_deref()))
}

/// `10⁶` times the value range, or times the peak magnitude when that is
/// larger so the level always dominates the data.
fn default_level(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    1e6 * (hi - lo).max(lo.abs()).max(hi.abs()).max(1.0)
}

pub fn restore(op: RestoreOp, opts: &Opts) -> Outcome {
    let start = Instant::now();
    let input = required(&opts.input, "in")?;
    let image = io::read_grid(input, None)?;
    let default_lambda = match op {
        RestoreOp::Denoise => Some(20.0),
        RestoreOp::Inpaint => Some(15.0),
        _ => None,
    };
    let mut p = params(opts, lambda(opts, default_lambda)?);
    if opts.level_m.is_none() {
        p = p.with_level(default_level(image.values()));
    }
    let (name, out, kept) = match op {
        RestoreOp::Denoise => {
            let noise = match &opts.mask {
                Some(path) => io::read_mask(path, None)?,
                None => detect_extreme_values(&image, 0.0, 255.0),
            };
            let pad = opts.pad.unwrap_or(2);
            p = p.with_padding(Padding::mirror(pad));
            let out = restore::denoise_salt_pepper(&image, &noise, &p, pad)?;
            ("restore.denoise", out, noise.complement())
        }
        RestoreOp::Inpaint => {
            let damage = io::read_mask(required(&opts.mask, "mask")?, None)?;
            (
                "restore.inpaint",
                restore::inpaint(&image, &damage, &p)?,
                damage.complement(),
            )
        }
        RestoreOp::Interp | RestoreOp::SmoothInterp => {
            let kept = io::read_mask(required(&opts.mask, "mask")?, None)?;
            let sample = SampleField::from_grid(&image, &kept)?;
            let out = if let RestoreOp::Interp = op {
                restore::average_transform(&sample, &p)?
            } else {
                restore::smooth_average_transform(&sample, &p)?
            };
            let name = if let RestoreOp::Interp = op {
                "restore.interp"
            } else {
                "restore.smooth-interp"
            };
            (name, out, kept)
        }
    };
    write_grid(&out, opts.out.as_deref())?;

    let mut value = json!({ "eps_k": num(rel_l2(&image, &out, Some(&kept))?) });
    if let Some(path) = &opts.reference {
        let truth = io::read_grid(path, None)?;
        value["psnr"] = psnr_value(psnr(&truth, &out, opts.peak)?);
        value["eps"] = num(rel_l2(&truth, &out, None)?);
        value["input_psnr"] = psnr_value(psnr(&truth, &image, opts.peak)?);
    }
    Ok(Report::new(name, start)
        .value(value)
        .params_from(&p)
        .grid(Some(input))
        .grid(opts.mask.as_deref())
        .grid(opts.reference.as_deref())
        .grid(opts.out.as_deref())
        .to(opts.report.as_deref()))
}

pub fn psnr_value(p: Psnr) -> Value {
    match p {
        Psnr::Exact => Value::String("exact".into()),
        Psnr::Db(v) => num(v),
    }
}

pub fn dist(op: DistOp, opts: &Opts) -> Outcome {
    let start = Instant::now();
    let input = required(&opts.input, "in")?;
    let DistOp::Edt = op;
    let k = io::read_mask(input, None)?;
    let d2 = squared_distance_transform(&k)?;
    let out = if opts.sqrt {
        d2.map(f64::sqrt)
    } else {
        d2.clone()
    };
    write_grid(&out, opts.out.as_deref())?;
    Ok(Report::new("dist.edt", start)
        .value(json!({ "max_distance": num(d2.max().sqrt()), "cells": k.count() }))
        .param("sqrt", opts.sqrt)
        .grid(Some(input))
        .grid(opts.out.as_deref())
        .to(opts.report.as_deref()))
}

pub fn metric(op: MetricOp, opts: &Opts) -> Outcome {
    let start = Instant::now();
    let first = required(&opts.input, "in")?;
    let second = required(&opts.mask, "mask")?;
    let (name, value, report) = match op {
        MetricOp::Psnr => {
            let v = psnr(
                &io::read_grid(first, None)?,
                &io::read_grid(second, None)?,
                opts.peak,
            )?;
            (
                "psnr",
                psnr_value(v),
                Report::new("psnr", start).param("peak", opts.peak),
            )
        }
        MetricOp::RelL2 => {
            let region = opts
                .region
                .as_deref()
                .map(|p| io::read_mask(p, None))
                .transpose()?;
            let v = rel_l2(
                &io::read_grid(first, None)?,
                &io::read_grid(second, None)?,
                region.as_ref(),
            )?;
            let r = Report::new("rel-l2", start).grid(opts.region.as_deref());
            ("rel-l2", num(v), r)
        }
        MetricOp::Hausdorff => {
            let v = hausdorff(&io::read_mask(first, None)?, &io::read_mask(second, None)?)?;
            ("hausdorff", num(v), Report::new("hausdorff", start))
        }
        MetricOp::Ehaus => {
            let level = opts.threshold.unwrap_or(DEFAULT_SUPPORT_LEVEL);
            let v = support_hausdorff_error(
                &io::read_mask(first, None)?,
                &io::read_grid(second, None)?,
                level,
            )?;
            (
                "ehaus",
                num(v),
                Report::new("ehaus", start).param("threshold", level),
            )
        }
    };
    let mut report = report.value(value).grid(Some(first)).grid(Some(second));
    report.metric = name.to_string();
    Ok(report.to(opts.report.as_deref()))
}
