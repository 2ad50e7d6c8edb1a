//! PNG companions: solver convergence and a heat map of `log10 |fₙ|`.

use std::path::Path;

use image::{Rgb, RgbImage};
use modschwarz::analytic::FormEvaluator;
use num_complex::Complex64;

const W: u32 = 560;
const H: u32 = 360;
const MARGIN: u32 = 30;

const STOPS: [[u8; 3]; 5] = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];

fn color(v: f64) -> Rgb<u8> {
    let v = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (v.floor() as usize).min(STOPS.len() - 2);
    let s = v - k as f64;
    let mix = |i| (STOPS[k][i] as f64 * (1.0 - s) + STOPS[k + 1][i] as f64 * s).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

fn line(img: &mut RgbImage, (x0, y0): (f64, f64), (x1, y1): (f64, f64), c: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// `log10` of the residual history against the iteration index, with a
/// dashed line at `tol`.
pub fn convergence(history: &[f64], tol: f64, path: &Path) -> image::ImageResult<()> {
    let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
    let black = Rgb([0, 0, 0]);
    let (x0, y0, x1, y1) = (MARGIN as f64, MARGIN as f64, (W - MARGIN) as f64, (H - MARGIN) as f64);
    line(&mut img, (x0, y1), (x1, y1), black);
    line(&mut img, (x0, y0), (x0, y1), black);
    let logs: Vec<f64> = history.iter().map(|v| v.max(1e-300).log10()).collect();
    let lo = logs.iter().copied().fold(tol.log10(), f64::min).floor();
    let hi = logs.iter().copied().fold(tol.log10(), f64::max).ceil().max(lo + 1.0);
    let px = |i: usize| x0 + (x1 - x0) * i as f64 / (history.len().max(2) - 1) as f64;
    let py = |v: f64| y1 - (y1 - y0) * (v - lo) / (hi - lo);
    // one tick per decade
    let mut d = lo;
    while d <= hi {
        line(&mut img, (x0 - 4.0, py(d)), (x0, py(d)), black);
        d += 1.0;
    }
    let yt = py(tol.log10());
    let mut x = x0;
    while x < x1 {
        line(&mut img, (x, yt), ((x + 6.0).min(x1), yt), Rgb([200, 40, 40]));
        x += 12.0;
    }
    let blue = Rgb([30, 80, 200]);
    for (i, w) in logs.windows(2).enumerate() {
        line(&mut img, (px(i), py(w[0])), (px(i + 1), py(w[1])), blue);
    }
    for (i, &v) in logs.iter().enumerate() {
        for dx in -2..=2 {
            for dy in -2..=2 {
                let (x, y) = (px(i) + dx as f64, py(v) + dy as f64);
                line(&mut img, (x, y), (x, y), blue);
            }
        }
    }
    img.save(path)
}

/// `log10 |fₙ(τ)|` on `−1 ≤ Re τ ≤ 1`, `0.55 ≤ Im τ ≤ 1.75`; points that
/// cannot be evaluated are grey.
pub fn modulus(f: &FormEvaluator<'_>, path: &Path) -> image::ImageResult<()> {
    let (re0, re1, im0, im1) = (-1.0, 1.0, 0.55, 1.75);
    let mut vals = vec![f64::NAN; (W * H) as usize];
    for j in 0..H {
        for i in 0..W {
            let tau = Complex64::new(
                re0 + (re1 - re0) * (i as f64 + 0.5) / W as f64,
                im1 - (im1 - im0) * (j as f64 + 0.5) / H as f64,
            );
            if let Ok(v) = f.direct(tau) {
                vals[(j * W + i) as usize] = v.norm().log10();
            }
        }
    }
    let mut finite: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let (lo, hi) = if finite.is_empty() {
        (0.0, 1.0)
    } else {
        (finite[finite.len() / 50], finite[finite.len() * 49 / 50].max(finite[finite.len() / 50] + 1e-9))
    };
    let img = RgbImage::from_fn(W, H, |i, j| {
        let v = vals[(j * W + i) as usize];
        if v.is_finite() {
            color((v - lo) / (hi - lo))
        } else {
            Rgb([128, 128, 128])
        }
    });
    img.save(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(color(0.0), Rgb(STOPS[0]));
        assert_eq!(color(1.0), Rgb(STOPS[4]));
        assert_eq!(color(-3.0), Rgb(STOPS[0]));
    }

    #[test]
    fn convergence_png() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        convergence(&[1.0, 1e-3, 1e-9, 1e-15], 1e-12, &p).unwrap();
        let img = image::open(&p).unwrap();
        assert_eq!((img.width(), img.height()), (W, H));
    }
}
