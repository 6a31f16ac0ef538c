use rayon::prelude::*;
use serde::Serialize;

use super::drift::{Drift, DriftSpec};
use super::ensemble::PathEnsemble;
use super::initial::InitialData;
use super::noise::{gaussian_pair, NoisePlan};
use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::scalar::Scalar;
use crate::spectral::EigenSystem;

/// Atom indices of the nodes at `xs`.
pub fn atom_sites<T: Scalar>(eigen: &EigenSystem<T>, xs: &[T]) -> Result<Vec<usize>> {
    let tol = T::of(1e-9);
    xs.iter()
        .map(|&x| {
            let i = eigen.nodes.partition_point(|&p| p < x - tol);
            match eigen.nodes.get(i) {
                Some(&p) if (p - x).abs() <= tol => Ok(i),
                _ => Err(Error::InvalidInput(format!("site {x} is not an atom of the discrete measure"))),
            }
        })
        .collect()
}

enum Source<'s, T> {
    Live(&'s DriftSpec<T>),
    Frozen(&'s DriftSpec<T>, &'s [T]),
}

/// Precomputed modal data shared by all paths.
struct Kernel<'a, T> {
    init: &'a InitialData<T>,
    plan: &'a NoisePlan<T>,
    k: usize,
    cells: Vec<usize>,
    phi_cells: Vec<T>,
    noise_scale: Vec<T>,
    phi_sites: Vec<T>,
    output_steps: Vec<usize>,
    cos: Vec<T>,
    sin_over: Vec<T>,
    omega_sin: Vec<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

impl<'a, T: Scalar> Kernel<'a, T> {
    fn new(
        eigen: &'a EigenSystem<T>,
        init: &'a InitialData<T>,
        plan: &'a NoisePlan<T>,
        site_atoms: &[usize],
        output_steps: Vec<usize>,
    ) -> Result<Self> {
        init.validate(eigen)?;
        let k = eigen.k_count();
        let tol = T::unit_tol();
        let cells: Vec<usize> = (0..eigen.node_count())
            .filter(|&j| {
                eigen.boundary == Boundary::Neumann || (eigen.nodes[j] > tol && eigen.nodes[j] < T::one() - tol)
            })
            .collect();
        let column = |j: usize| eigen.eigenvectors.iter().map(move |phi| phi[j]);
        let phi_cells = cells.iter().flat_map(|&j| column(j)).collect();
        let phi_sites = site_atoms.iter().flat_map(|&j| column(j)).collect();
        let noise_scale = cells.iter().map(|&j| (plan.dt * eigen.masses[j]).sqrt()).collect();
        let dt = plan.dt;
        let mut cos = Vec::with_capacity(k);
        let mut sin_over = Vec::with_capacity(k);
        let mut omega_sin = Vec::with_capacity(k);
        for &l in &eigen.eigenvalues {
            if l <= T::zero() {
                cos.push(T::one());
                sin_over.push(dt);
                omega_sin.push(T::zero());
            } else {
                let w = l.sqrt();
                let (s, c) = (w * dt).sin_cos();
                cos.push(c);
                sin_over.push(s / w);
                omega_sin.push(w * s);
            }
        }
        Ok(Self {
            init,
            plan,
            k,
            cells,
            phi_cells,
            noise_scale,
            phi_sites,
            output_steps,
            cos,
            sin_over,
            omega_sin,
        })
    }

    fn n_cells(&self) -> usize {
        self.cells.len()
    }

    fn n_sites(&self) -> usize {
        self.phi_sites.len() / self.k
    }

    /// Runs one path; `record` receives `u` at every cell for steps `0..=steps`.
    fn run(&self, path: usize, source: Source<'_, T>, out: &mut [T], mut record: Option<&mut [T]>) -> Result<()> {
        let k = self.k;
        let nc = self.n_cells();
        let ns = self.n_sites();
        let mut y = self.init.u0.clone();
        let mut v = self.init.u1.clone();
        let mut impulse = vec![T::zero(); k];
        let mut u_cells = vec![T::zero(); nc];
        let (drift, frozen) = match source {
            Source::Live(d) => (d, None),
            Source::Frozen(d, prev) => (d, Some(prev)),
        };
        let silent = matches!(drift.drift, Drift::Zero);
        let live_state = frozen.is_none() && !drift.drift.is_state_independent();
        let need_cells = record.is_some() || live_state;
        let constant_g = drift.eval(T::zero());
        let mut next_output = 0;
        let seed = self.plan.master_seed;
        let blowup = |step| Error::Blowup { path, step };

        for step in 0..=self.plan.steps {
            if need_cells {
                for (w, u) in u_cells.iter_mut().enumerate() {
                    *u = dot(&self.phi_cells[w * k..(w + 1) * k], &y);
                }
                if !u_cells.iter().all(|u| u.is_finite()) {
                    return Err(blowup(step));
                }
                if let Some(rec) = record.as_deref_mut() {
                    rec[step * nc..(step + 1) * nc].copy_from_slice(&u_cells);
                }
            }
            while next_output < self.output_steps.len() && self.output_steps[next_output] == step {
                for s in 0..ns {
                    let u = dot(&self.phi_sites[s * k..(s + 1) * k], &y);
                    if !u.is_finite() {
                        return Err(blowup(step));
                    }
                    out[next_output * ns + s] = u;
                }
                next_output += 1;
            }
            if step == self.plan.steps {
                break;
            }
            if !silent {
                impulse.iter_mut().for_each(|i| *i = T::zero());
                let mut cached: Option<(usize, (f64, f64))> = None;
                for (w, &atom) in self.cells.iter().enumerate() {
                    let g = if let Some(prev) = frozen {
                        drift.eval(prev[step * nc + w])
                    } else if live_state {
                        drift.eval(u_cells[w])
                    } else {
                        constant_g
                    };
                    if g == T::zero() {
                        continue;
                    }
                    let pair = atom / 2;
                    let normals = match cached {
                        Some((p, z)) if p == pair => z,
                        _ => {
                            let z = gaussian_pair(seed, path as u64, step as u64, pair as u64);
                            cached = Some((pair, z));
                            z
                        }
                    };
                    let z = if atom % 2 == 0 { normals.0 } else { normals.1 };
                    let a = g * self.noise_scale[w] * T::of(z);
                    for (i, &p) in impulse.iter_mut().zip(&self.phi_cells[w * k..(w + 1) * k]) {
                        *i = *i + a * p;
                    }
                }
                for (vi, &i) in v.iter_mut().zip(&impulse) {
                    *vi = *vi + i;
                }
            }
            for m in 0..k {
                let (ym, vm) = (y[m], v[m]);
                y[m] = self.cos[m] * ym + self.sin_over[m] * vm;
                v[m] = self.cos[m] * vm - self.omega_sin[m] * ym;
            }
            if !y.iter().all(|x| x.is_finite()) {
                return Err(blowup(step + 1));
            }
        }
        Ok(())
    }
}

fn prepare<'a, T: Scalar>(
    eigen: &'a EigenSystem<T>,
    init: &'a InitialData<T>,
    plan: &'a NoisePlan<T>,
    sites: &[T],
    times: &[T],
) -> Result<(Kernel<'a, T>, PathEnsemble<T>)> {
    let site_atoms = atom_sites(eigen, sites)?;
    let steps = times.iter().map(|&t| plan.step_of(t)).collect::<Result<Vec<_>>>()?;
    if !steps.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("output times must be strictly increasing".into()));
    }
    let kernel = Kernel::new(eigen, init, plan, &site_atoms, steps.clone())?;
    let ensemble = PathEnsemble {
        times: steps.iter().map(|&j| plan.time(j)).collect(),
        time_steps: steps,
        sites: site_atoms.iter().map(|&j| eigen.nodes[j]).collect(),
        site_atoms,
        n_paths: plan.n_paths,
        seed: plan.master_seed,
        values: Vec::new(),
        config_digest: None,
    };
    Ok((kernel, ensemble))
}

/// Simulates the mild solution with the explicit left-point Walsh scheme.
///
/// Noise on cell `w` over step `j` is `N(0, dt m_w)`; modes evolve exactly between steps.
pub fn simulate_paths<T: Scalar>(
    eigen: &EigenSystem<T>,
    init: &InitialData<T>,
    drift: &DriftSpec<T>,
    plan: &NoisePlan<T>,
    sites: &[T],
    times: &[T],
) -> Result<PathEnsemble<T>> {
    let (kernel, mut ensemble) = prepare(eigen, init, plan, sites, times)?;
    let block = times.len() * sites.len();
    let results: Vec<Result<Vec<T>>> = (0..plan.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut out = vec![T::zero(); block];
            kernel.run(p, Source::Live(drift), &mut out, None)?;
            Ok(out)
        })
        .collect();
    ensemble.values = Vec::with_capacity(block * plan.n_paths);
    for r in results {
        ensemble.values.extend(r?);
    }
    Ok(ensemble)
}

/// Successive sup-distances between Picard iterates, maximised over paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace<T> {
    pub differences: Vec<T>,
    pub contraction_estimates: Vec<T>,
    pub iterations: usize,
}

/// Picard iteration with the noise held fixed across iterates.
///
/// Iterate zero is the deterministic part; each further iterate evaluates `f`
/// on the previous one over the whole space-time grid.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve<T: Scalar>(
    eigen: &EigenSystem<T>,
    init: &InitialData<T>,
    drift: &DriftSpec<T>,
    plan: &NoisePlan<T>,
    sites: &[T],
    times: &[T],
    tol: T,
    max_iter: usize,
) -> Result<(PathEnsemble<T>, PicardTrace<T>)> {
    let (kernel, mut ensemble) = prepare(eigen, init, plan, sites, times)?;
    let block = times.len() * sites.len();
    let grid = (plan.steps + 1) * kernel.n_cells();
    let zero = DriftSpec::new(Drift::Zero)?;
    let results: Vec<Result<(Vec<T>, Vec<T>)>> = (0..plan.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut out = vec![T::zero(); block];
            let mut prev = vec![T::zero(); grid];
            let mut next = vec![T::zero(); grid];
            kernel.run(p, Source::Live(&zero), &mut out, Some(&mut prev))?;
            let mut diffs = Vec::new();
            for _ in 0..max_iter {
                kernel.run(p, Source::Frozen(drift, &prev), &mut out, Some(&mut next))?;
                let d = prev.iter().zip(&next).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
                diffs.push(d);
                std::mem::swap(&mut prev, &mut next);
                if d < tol {
                    return Ok((out, diffs));
                }
            }
            Err(Error::NoConvergence {
                iterations: max_iter,
                last_difference: diffs.last().map_or(f64::NAN, |d| d.to_f64_lossy()),
                contraction_estimates: ratios(&diffs).iter().map(|r| r.to_f64_lossy()).collect(),
            })
        })
        .collect();
    let mut differences: Vec<T> = Vec::new();
    ensemble.values = Vec::with_capacity(block * plan.n_paths);
    for r in results {
        let (out, diffs) = r?;
        if diffs.len() > differences.len() {
            differences.resize(diffs.len(), T::zero());
        }
        for (acc, d) in differences.iter_mut().zip(diffs) {
            *acc = acc.max(d);
        }
        ensemble.values.extend(out);
    }
    let trace = PicardTrace {
        contraction_estimates: ratios(&differences),
        iterations: differences.len(),
        differences,
    };
    Ok((ensemble, trace))
}

fn ratios<T: Scalar>(d: &[T]) -> Vec<T> {
    d.windows(2)
        .map(|w| if w[0] > T::zero() { w[1] / w[0] } else { T::zero() })
        .collect()
}
