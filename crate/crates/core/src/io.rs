//! Deterministic artifact writers: CSV tables and JSON documents, floats at
//! 17 significant digits, LF line endings.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::Result;
use crate::evolve::Snapshot;
use crate::series::ReturnSeries;
use crate::spectral::SpectralGrid;
use crate::surface::PolyaSurface;

/// Pretty JSON with every float rendered as {:.16e}: 17 significant digits,
/// enough to round-trip f64 exactly, and stable to diff across platforms.
pub struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl SciFormatter<'_> {
    pub fn new() -> Self {
        SciFormatter { inner: PrettyFormatter::new() }
    }
}

impl Default for SciFormatter<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, SciFormatter::new());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

pub fn series_csv(series: &ReturnSeries) -> String {
    let mut s = String::from("t,p0\n");
    for &(t, p) in series.entries() {
        s.push_str(&format!("{t},{p:.16e}\n"));
    }
    s
}

pub fn write_series_csv(path: &Path, series: &ReturnSeries) -> Result<()> {
    std::fs::write(path, series_csv(series))?;
    Ok(())
}

pub fn snapshot_csv(snapshot: &Snapshot, d: usize) -> String {
    let mut s = String::new();
    for a in 1..=d {
        s.push_str(&format!("m{a},"));
    }
    s.push_str("p\n");
    for (site, p) in &snapshot.sites {
        for &m in site {
            s.push_str(&format!("{m},"));
        }
        s.push_str(&format!("{p:.16e}\n"));
    }
    s
}

pub fn write_snapshot_csv(path: &Path, snapshot: &Snapshot, d: usize) -> Result<()> {
    std::fs::write(path, snapshot_csv(snapshot, d))?;
    Ok(())
}

pub fn bands_csv(grid: &SpectralGrid) -> String {
    let mut s = String::new();
    for a in 1..=grid.d {
        s.push_str(&format!("k{a},"));
    }
    s.push_str("band,omega\n");
    for node in 0..grid.nodes() {
        let k = grid.k_of(&grid.multi_index(node));
        for band in 0..grid.c {
            for &ka in &k {
                s.push_str(&format!("{ka:.16e},"));
            }
            s.push_str(&format!("{band},{:.16e}\n", grid.omega(node, band)));
        }
    }
    s
}

pub fn write_bands_csv(path: &Path, grid: &SpectralGrid) -> Result<()> {
    std::fs::write(path, bands_csv(grid))?;
    Ok(())
}

pub fn surface_csv(surface: &PolyaSurface) -> String {
    let mut s = String::from("a,phi,polya\n");
    for &(a, phi, p) in &surface.rows {
        s.push_str(&format!("{a:.16e},{phi:.16e},{p:.16e}\n"));
    }
    s
}

pub fn write_surface_csv(path: &Path, surface: &PolyaSurface) -> Result<()> {
    std::fs::write(path, surface_csv(surface))?;
    Ok(())
}
