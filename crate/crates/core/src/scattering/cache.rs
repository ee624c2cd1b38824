//! On-disk cache of Neumann solutions, keyed by potential hash, `N`, `ℓ` and grid.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{solve_neumann, RadialGrid, RadialPotential, ScatteringSolution};
use crate::Result;

/// Bumped whenever the solver or the stored layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Entry {
    schema_version: u32,
    potential_hash: String,
    particles: u64,
    ell: f64,
    grid: RadialGrid,
    solution: ScatteringSolution,
}

pub fn entry_path(
    dir: &Path,
    v: &RadialPotential,
    particles: u64,
    ell: f64,
    grid: &RadialGrid,
) -> PathBuf {
    let hash = v.content_hash();
    dir.join(format!(
        "neumann-s{SCHEMA_VERSION}-{}-n{particles}-l{:016x}-g{}x{}-t{:016x}.json",
        &hash[..16],
        ell.to_bits(),
        grid.inner,
        grid.outer,
        grid.tolerance.to_bits()
    ))
}

/// Returns a cached solution when one with a matching key exists, otherwise
/// solves and stores the result. Unreadable or stale entries are recomputed.
pub fn load_or_solve(
    dir: &Path,
    v: &RadialPotential,
    particles: u64,
    ell: f64,
    grid: &RadialGrid,
) -> Result<ScatteringSolution> {
    let path = entry_path(dir, v, particles, ell, grid);
    let hash = v.content_hash();
    if let Ok(bytes) = fs::read(&path) {
        if let Ok(entry) = serde_json::from_slice::<Entry>(&bytes) {
            if entry.schema_version == SCHEMA_VERSION
                && entry.potential_hash == hash
                && entry.particles == particles
                && entry.ell == ell
                && entry.grid == *grid
            {
                return Ok(entry.solution);
            }
        }
    }
    let solution = solve_neumann(v, particles, ell, grid)?;
    fs::create_dir_all(dir)?;
    let entry = Entry {
        schema_version: SCHEMA_VERSION,
        potential_hash: hash,
        particles,
        ell,
        grid: *grid,
        solution,
    };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec(&entry)?)?;
    fs::rename(&tmp, &path)?;
    Ok(entry.solution)
}
