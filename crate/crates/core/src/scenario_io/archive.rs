//! Binary route archive, little-endian throughout:
//!
//! ```text
//! magic "SIDARCH\0" | version u32 | scenario hash [u8; 32]
//! sid str | mode str | n_types u32 | type names str* | design counts (u32 x 3)*
//! grid: origin_x f64 | origin_y f64 | cell f64 | nx u64 | ny u64
//! n_entries u64, then per entry:
//!   x vec<f64> | objectives f64 x 2 | fuel, distance, flight_time f64 x n_types
//!   SEL f32 x cells, per type
//!   track: n u64, (x f64, y f64, s f64, leg u8, has_radius u8, radius f64)*
//!   profiles: per type n u64, (time, s, h, v_eas, thrust f64)*
//! ```
//! `str` is a u32 byte length followed by UTF-8; `vec<f64>` is a u64 length
//! followed by the values.

use std::path::Path;

use super::scenario::ScenarioHash;
use super::{read_file, write_atomic, ScenarioIoError};
use crate::framework::{Mode, ProfilePoint, RouteArchive, RouteEntry};
use crate::noise::{GridGeometry, SelGrid};
use crate::trajectory::{LegKind, TrackVertex};

pub const ARCHIVE_MAGIC: [u8; 8] = *b"SIDARCH\0";
pub const ARCHIVE_VERSION: u32 = 1;

/// A route archive together with the scenario it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveFile {
    pub hash: ScenarioHash,
    pub archive: RouteArchive,
}

/// Encodes an archive. Fails if entries disagree with the header on the
/// number of aircraft types or the grid.
pub fn write_archive(archive: &RouteArchive, hash: &ScenarioHash) -> Result<Vec<u8>, String> {
    let types = archive.aircraft.len();
    if archive.design_counts.len() != types {
        return Err(format!("{} design count rows for {types} aircraft types", archive.design_counts.len()));
    }
    let mut w = Writer::default();
    w.bytes(&ARCHIVE_MAGIC);
    w.u32(ARCHIVE_VERSION);
    w.bytes(&hash.0);
    w.str(&archive.sid);
    w.str(&archive.mode.to_string());
    w.u32(types as u32);
    for name in &archive.aircraft {
        w.str(name);
    }
    for c in &archive.design_counts {
        c.iter().for_each(|&v| w.u32(v));
    }
    let g = &archive.geometry;
    w.f64(g.origin_x);
    w.f64(g.origin_y);
    w.f64(g.cell_size);
    w.u64(g.nx as u64);
    w.u64(g.ny as u64);
    w.u64(archive.entries.len() as u64);
    for (n, e) in archive.entries.iter().enumerate() {
        let per_type = [e.fuel.len(), e.distance.len(), e.flight_time.len(), e.sel.len(), e.profiles.len()];
        if per_type.iter().any(|&l| l != types) {
            return Err(format!("entry {n} does not carry one value per aircraft type"));
        }
        if let Some(s) = e.sel.iter().find(|s| s.geometry != *g || s.sel.len() != g.len()) {
            return Err(format!("entry {n} has an SEL grid of {} cells on a different geometry", s.sel.len()));
        }
        w.u64(e.x.len() as u64);
        e.x.iter().for_each(|&v| w.f64(v));
        e.objectives.iter().for_each(|&v| w.f64(v));
        for v in [&e.fuel, &e.distance, &e.flight_time] {
            v.iter().for_each(|&x| w.f64(x));
        }
        for s in &e.sel {
            s.sel.iter().for_each(|&v| w.bytes(&v.to_le_bytes()));
        }
        w.u64(e.track.len() as u64);
        for v in &e.track {
            w.f64(v.x);
            w.f64(v.y);
            w.f64(v.s);
            w.bytes(&[match v.leg {
                LegKind::Tf => 0,
                LegKind::Rf => 1,
            }]);
            w.bytes(&[v.turn_radius.is_some() as u8]);
            w.f64(v.turn_radius.unwrap_or(0.0));
        }
        for p in &e.profiles {
            w.u64(p.len() as u64);
            for q in p {
                [q.time, q.s, q.h, q.v_eas, q.thrust].iter().for_each(|&v| w.f64(v));
            }
        }
    }
    Ok(w.0)
}

/// Decodes an archive without checking its scenario hash.
pub fn read_archive(bytes: &[u8], path: &Path) -> Result<ArchiveFile, ScenarioIoError> {
    let err = |reason: String| ScenarioIoError::ArchiveFormat {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8).map_err(&err)? != ARCHIVE_MAGIC {
        return Err(err("missing archive signature".into()));
    }
    let version = r.u32().map_err(&err)?;
    if version != ARCHIVE_VERSION {
        return Err(err(format!("version {version} is not supported (expected {ARCHIVE_VERSION})")));
    }
    let decode = |r: &mut Reader| -> Result<ArchiveFile, String> {
        let hash = ScenarioHash(r.take(32)?.try_into().expect("32 bytes"));
        let sid = r.str()?;
        let mode: Mode = r.str()?.parse()?;
        let types = r.u32()? as usize;
        let aircraft = (0..types).map(|_| r.str()).collect::<Result<Vec<_>, _>>()?;
        let design_counts = (0..types)
            .map(|_| Ok([r.u32()?, r.u32()?, r.u32()?]))
            .collect::<Result<Vec<_>, String>>()?;
        let (ox, oy, cell) = (r.f64()?, r.f64()?, r.f64()?);
        let (nx, ny) = (r.u64()? as usize, r.u64()? as usize);
        let geometry = GridGeometry::new(ox, oy, cell, nx, ny).map_err(|e| e.to_string())?;
        let n = r.u64()?;
        let mut entries = Vec::new();
        for _ in 0..n {
            let x = r.f64_vec()?;
            let objectives = [r.f64()?, r.f64()?];
            let mut per_type = || (0..types).map(|_| r.f64()).collect::<Result<Vec<_>, _>>();
            let fuel = per_type()?;
            let distance = per_type()?;
            let flight_time = per_type()?;
            let sel = (0..types)
                .map(|_| {
                    let raw = r.take(geometry.len().checked_mul(4).ok_or("grid too large")?)?;
                    Ok(SelGrid {
                        geometry,
                        sel: raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect(),
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            let len = r.len(8 * 3 + 2 + 8)?;
            let mut track = Vec::with_capacity(len);
            for _ in 0..len {
                let (x, y, s) = (r.f64()?, r.f64()?, r.f64()?);
                let leg = match r.take(1)?[0] {
                    0 => LegKind::Tf,
                    1 => LegKind::Rf,
                    b => return Err(format!("unknown leg kind {b}")),
                };
                let has_radius = r.take(1)?[0] != 0;
                let radius = r.f64()?;
                track.push(TrackVertex {
                    x,
                    y,
                    s,
                    leg,
                    turn_radius: has_radius.then_some(radius),
                });
            }
            let mut profiles = Vec::with_capacity(types);
            for _ in 0..types {
                let len = r.len(40)?;
                let mut p = Vec::with_capacity(len);
                for _ in 0..len {
                    p.push(ProfilePoint {
                        time: r.f64()?,
                        s: r.f64()?,
                        h: r.f64()?,
                        v_eas: r.f64()?,
                        thrust: r.f64()?,
                    });
                }
                profiles.push(p);
            }
            entries.push(RouteEntry {
                x,
                objectives,
                fuel,
                distance,
                flight_time,
                sel,
                track,
                profiles,
            });
        }
        if r.pos != r.buf.len() {
            return Err(format!("{} unexpected trailing bytes", r.buf.len() - r.pos));
        }
        Ok(ArchiveFile {
            hash,
            archive: RouteArchive {
                sid,
                mode,
                aircraft,
                design_counts,
                geometry,
                entries,
            },
        })
    };
    decode(&mut r).map_err(err)
}

/// Writes an archive atomically.
pub fn save_archive(path: &Path, archive: &RouteArchive, hash: &ScenarioHash) -> Result<(), ScenarioIoError> {
    let bytes = write_archive(archive, hash).map_err(|reason| ScenarioIoError::ArchiveFormat {
        path: path.to_path_buf(),
        reason,
    })?;
    write_atomic(path, &bytes)
}

/// Loads an archive, refusing one built for a different scenario unless
/// `allow_mismatch` is set.
pub fn load_archive(path: &Path, expected: &ScenarioHash, allow_mismatch: bool) -> Result<ArchiveFile, ScenarioIoError> {
    let file = read_archive(&read_file(path)?, path)?;
    if file.hash != *expected && !allow_mismatch {
        return Err(ScenarioIoError::HashMismatch {
            path: path.to_path_buf(),
            expected: expected.to_string(),
            found: file.hash.to_string(),
        });
    }
    Ok(file)
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }

    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            format!("truncated at byte {} (needed {n} more bytes)", self.pos)
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A length prefix, checked against the bytes left so corrupt headers cannot over-allocate.
    fn len(&mut self, item_size: usize) -> Result<usize, String> {
        let n = self.u64()?;
        let left = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(item_size as u64) > left {
            return Err(format!("length {n} at byte {} exceeds the remaining data", self.pos - 8));
        }
        Ok(n as usize)
    }

    fn f64_vec(&mut self) -> Result<Vec<f64>, String> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn str(&mut self) -> Result<String, String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| "string is not UTF-8".to_string())
    }
}
