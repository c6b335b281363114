//! Procedural handwritten-style digits in MNIST layout (28×28, `u8`, white on black).
//!
//! Each class is a fixed set of strokes in the unit square. Every sample jitters
//! the control points, applies a random rotation / shear / scale / shift, renders
//! the strokes with an anti-aliased pen of random width and adds pixel noise.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::idx;

pub const SIDE: usize = 28;

type Stroke = Vec<(f64, f64)>;

fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64, n: usize) -> Stroke {
    (0..=n)
        .map(|i| {
            let a = from + (to - from) * i as f64 / n as f64;
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn glyph(digit: u8) -> Vec<Stroke> {
    match digit {
        0 => vec![arc(0.5, 0.5, 0.24, 0.36, 0.0, 2.0 * PI, 20)],
        1 => vec![
            vec![(0.52, 0.12), (0.5, 0.88)],
            vec![(0.36, 0.26), (0.52, 0.12)],
        ],
        2 => {
            let mut s = arc(0.5, 0.32, 0.22, 0.2, PI * 1.05, PI * 2.2, 12);
            s.extend([(0.26, 0.86), (0.78, 0.86)]);
            vec![s]
        }
        3 => {
            let mut s = arc(0.48, 0.3, 0.22, 0.18, PI * 1.1, PI * 2.45, 10);
            s.extend(arc(0.48, 0.67, 0.25, 0.2, PI * 1.55, PI * 2.9, 12));
            vec![s]
        }
        4 => vec![vec![(0.62, 0.88), (0.62, 0.12), (0.22, 0.64), (0.8, 0.64)]],
        5 => {
            let mut s = vec![(0.74, 0.13), (0.34, 0.13), (0.3, 0.45)];
            s.extend(arc(0.48, 0.64, 0.25, 0.22, PI * 1.3, PI * 2.75, 12));
            vec![s]
        }
        6 => {
            let mut s = vec![(0.68, 0.12), (0.4, 0.38)];
            s.extend(arc(0.5, 0.67, 0.22, 0.2, PI * 0.95, PI * 2.95, 16));
            vec![s]
        }
        7 => vec![vec![(0.24, 0.14), (0.78, 0.14), (0.42, 0.88)]],
        8 => vec![
            arc(0.5, 0.3, 0.18, 0.17, 0.0, 2.0 * PI, 14),
            arc(0.5, 0.69, 0.22, 0.2, 0.0, 2.0 * PI, 16),
        ],
        9 => {
            let mut s = arc(0.5, 0.33, 0.21, 0.2, 0.05 * PI, 2.05 * PI, 16);
            s.extend([(0.7, 0.4), (0.6, 0.88)]);
            vec![s]
        }
        _ => unreachable!("digits are 0..=9"),
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Renders one sample of `digit`.
pub fn render(digit: u8, rng: &mut impl Rng) -> Vec<u8> {
    let angle = rng.random_range(-0.25..0.25);
    let shear = rng.random_range(-0.25..0.25);
    let scale = rng.random_range(0.75..1.05) * 20.0;
    let aspect = rng.random_range(0.85..1.15);
    let shift = (rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
    let pen = rng.random_range(1.0..2.2);
    let jitter = 0.05;
    let (sin, cos) = f64::sin_cos(angle);
    let strokes: Vec<Stroke> = glyph(digit)
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|(x, y)| {
                    let x = x + rng.random_range(-jitter..jitter) - 0.5;
                    let y = y + rng.random_range(-jitter..jitter) - 0.5;
                    let x = (x + shear * y) * aspect;
                    let (rx, ry) = (cos * x - sin * y, sin * x + cos * y);
                    (14.0 + shift.0 + rx * scale, 14.0 + shift.1 + ry * scale)
                })
                .collect()
        })
        .collect();
    let mut img = vec![0u8; SIDE * SIDE];
    for py in 0..SIDE {
        for px in 0..SIDE {
            let p = (px as f64 + 0.5, py as f64 + 0.5);
            let d = strokes
                .iter()
                .flat_map(|s| s.windows(2).map(move |w| segment_distance(p, w[0], w[1])))
                .fold(f64::INFINITY, f64::min);
            let ink = (pen + 0.5 - d).clamp(0.0, 1.0);
            let noise: f64 = rng.random_range(-0.08..0.08);
            let v = if ink > 0.0 {
                ink + noise
            } else {
                noise.max(0.0) * 0.5
            };
            img[py * SIDE + px] = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
    }
    img
}

/// `n` samples with labels cycling through 0..=9 in a seeded random order.
pub fn generate(n: usize, seed: u64) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = Vec::with_capacity(n * SIDE * SIDE);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let digit = rng.random_range(0..10u8);
        pixels.extend(render(digit, &mut rng));
        labels.push(digit);
    }
    (pixels, labels)
}

/// Writes `train-*` and `t10k-*` IDX files into `dir`.
pub fn write_dataset(dir: &Path, train: usize, test: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::error::ToolError::io(dir, e))?;
    for (split, n, s) in [("train", train, seed), ("t10k", test, seed ^ 0x5eed_7e57)] {
        let (pixels, labels) = generate(n, s);
        let (ip, lp) = idx::split_paths(dir, split);
        idx::write_images(&ip, SIDE, SIDE, &pixels)?;
        idx::write_labels(&lp, &labels)?;
    }
    Ok(())
}
