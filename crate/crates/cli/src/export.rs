//! Artifact writers: portable grayscale images (binary PGM), trace CSV,
//! and JSON sidecars.
//!
//! Image rows run top-down (row 0 holds the grid's maximum y). The mask
//! export maps drivable to 255 and non-drivable to 0, bit-exactly; density
//! images map values linearly onto 0..=255 with the true maximum recorded
//! in a JSON sidecar next to the image.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use trajraster::map::DrivableMask;
use trajraster::optim::{OptTrace, TraceStatus};
use trajraster::raster::GaussianRaster;
use trajraster::Result;

pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes)?;
    Ok(())
}

pub fn mask_pixels(mask: &DrivableMask) -> (usize, usize, Vec<u8>) {
    let (nx, ny) = (mask.grid().nx(), mask.grid().ny());
    let mut pixels = Vec::with_capacity(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            pixels.push(if mask.bit(i, j) { 255 } else { 0 });
        }
    }
    (nx, ny, pixels)
}

/// Render a raster over the full grid. Returns the image and the maximum
/// cell value (0 when the raster is empty).
pub fn raster_pixels(raster: &GaussianRaster) -> (usize, usize, Vec<u8>, f64) {
    let grid = raster.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let max = raster.values().iter().copied().fold(0.0f64, f64::max);
    let mut pixels = Vec::with_capacity(nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = raster.value(i, j);
            pixels.push(if max > 0.0 {
                (v / max * 255.0).round() as u8
            } else {
                0
            });
        }
    }
    (nx, ny, pixels, max)
}

pub fn write_raster_with_sidecar(stem: &Path, raster: &GaussianRaster) -> Result<()> {
    let (w, h, pixels, max) = raster_pixels(raster);
    write_pgm(&stem.with_extension("pgm"), w, h, pixels.as_slice())?;
    let sidecar = serde_json::json!({
        "max_value": max,
        "width": w,
        "height": h,
        "mapping": "pixel = round(value / max_value * 255), rows top-down",
    });
    fs::write(
        stem.with_extension("json"),
        serde_json::to_string_pretty(&sidecar).expect("sidecar serialization") + "\n",
    )?;
    Ok(())
}

/// Fixed column order: iter,x,y,theta,loss,grad_norm.
pub fn trace_csv(trace: &OptTrace) -> String {
    let mut out = String::from("iter,x,y,theta,loss,grad_norm\n");
    for p in &trace.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.iteration, p.state.x, p.state.y, p.state.theta, p.loss, p.grad_norm
        )
        .expect("string write");
    }
    out
}

pub fn status_label(status: TraceStatus) -> String {
    match status {
        TraceStatus::Completed => "completed".into(),
        TraceStatus::BoundaryExit { iteration } => {
            format!("boundary_exit_at_{iteration}")
        }
    }
}
