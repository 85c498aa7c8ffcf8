//! Seeded Monte Carlo clouds dropped onto the mirror.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::error::{require_positive, Error, Result};
use crate::mirror::{barrier_top, effective_mirror_radius, MirrorPotential, PotentialOptions};
use crate::optics::{AtomSpecies, EwField, EwGeometry};

use super::integrator::{free_flight, integrate_bounce, switch_height, time_to_height};
use super::recoil::{apply_recoil_statistics, apply_systematics, RecoilMode, Systematics};
use super::rng::{stream, Channel};
use super::{AtomState, BounceOptions, ScatterMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// Each atom is integrated in the local potential at its impact point.
    SoftEdge,
    /// Atoms inside the effective radius bounce, all others are lost.
    SharpDisk,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudSetup {
    pub species: AtomSpecies,
    pub geometry: EwGeometry,
    pub detuning: f64,
    pub potential: PotentialOptions,
    pub temperature: f64,
    pub release_height: f64,
    pub mot_sigma: f64,
    pub systematics: Systematics,
    pub atom_count: usize,
    pub recoil_mode: RecoilMode,
    pub membership: Membership,
    pub scattering: bool,
    /// Multiplier on the two-level scattering rate along trajectories.
    pub rate_scale: f64,
    pub bounce: BounceOptions,
    pub max_bounces: u32,
}

/// Setup plus the quantities derived once per run.
#[derive(Debug, Clone)]
pub struct CloudModel {
    pub setup: CloudSetup,
    pub field: EwField,
    pub potential: MirrorPotential,
    pub r_eff: f64,
    bounce: BounceOptions,
    gravity: f64,
    z_switch: f64,
}

impl CloudModel {
    pub fn new(setup: CloudSetup) -> Result<Self> {
        require_positive("temperature", setup.temperature)?;
        require_positive("release_height", setup.release_height)?;
        require_positive("mot_sigma", setup.mot_sigma)?;
        let field = EwField::new(&setup.geometry, &setup.species, setup.detuning)?;
        let potential = MirrorPotential::from_field(
            &field,
            &setup.species,
            setup.geometry.refractive_index,
            &setup.potential,
        )?;
        let energy = setup.species.mass * potential.mg / setup.species.mass * setup.release_height;
        let r_eff = effective_mirror_radius(&potential, setup.geometry.waist, energy)?;
        let mut bounce = setup.bounce;
        bounce.record = false;
        bounce.rate_scale = setup.rate_scale;
        bounce.scatter = match (setup.scattering, setup.recoil_mode) {
            (false, _) => ScatterMode::Off,
            (true, RecoilMode::Deterministic) => ScatterMode::MeanForce,
            (true, RecoilMode::Stochastic) => ScatterMode::Tally,
        };
        let gravity = if setup.potential.include_gravity {
            crate::constants::GRAVITY
        } else {
            0.0
        };
        let z_switch = switch_height(&potential, &bounce);
        Ok(Self {
            setup,
            field,
            potential,
            r_eff,
            bounce,
            gravity,
            z_switch,
        })
    }

    pub fn velocity_sigma(&self) -> f64 {
        (BOLTZMANN * self.setup.temperature / self.setup.species.mass).sqrt()
    }

    /// Initial state of atom `id` in ensemble `ensemble`.
    pub fn initial_atom(&self, seed: u64, ensemble: u64, id: u64) -> AtomState {
        let mut rng = stream(seed, ensemble, id, Channel::Initial);
        let mut normal = || -> f64 { rng.sample(StandardNormal) };
        let (s, sv) = (self.setup.mot_sigma, self.velocity_sigma());
        let atom = AtomState {
            x: s * normal(),
            y: s * normal(),
            z: self.setup.release_height + s * normal(),
            v_x: sv * normal(),
            v_y: sv * normal(),
            v_z: sv * normal(),
            scattered: 0.0,
        };
        self.setup.systematics.apply_initial(&atom)
    }

    fn reflects(&self, state: &AtomState) -> Option<f64> {
        let w = self.setup.geometry.waist;
        let r2 = state.x * state.x + state.y * state.y;
        if self.setup.membership == Membership::SharpDisk && r2 >= self.r_eff * self.r_eff {
            return None;
        }
        let f = (-2.0 * r2 / (w * w)).exp();
        // The barrier never exceeds the local dipole amplitude.
        let kinetic = 0.5 * self.setup.species.mass * state.v_z * state.v_z;
        (f * self.potential.u0 > kinetic).then_some(f)
    }

    /// Follows one atom through all requested (ascending) times.
    pub fn evolve(&self, seed: u64, ensemble: u64, id: u64, times: &[f64]) -> Result<Vec<AtomRecord>> {
        let initial = self.initial_atom(seed, ensemble, id);
        let mut recoil_rng = stream(seed, ensemble, id, Channel::Recoil);
        let mut state = initial;
        let mut t = 0.0;
        let mut bounces = 0u32;
        let mut lost = false;
        let mut reached = false;
        let mut out = Vec::with_capacity(times.len());
        for &t_snap in times {
            while !lost && bounces < self.setup.max_bounces {
                let Some(dt_hit) = time_to_height(state.z, state.v_z, self.gravity, self.z_switch)
                else {
                    break;
                };
                if t + dt_hit > t_snap {
                    break;
                }
                let impact = free_flight(&state, dt_hit, self.gravity);
                t += dt_hit;
                reached = true;
                let Some(f) = self.reflects(&impact) else {
                    lost = true;
                    state = AtomState { z: 0.0, ..impact };
                    break;
                };
                let local = self.potential.scaled(f);
                let traj = match integrate_bounce(
                    &impact,
                    t,
                    &local,
                    &self.setup.species,
                    &self.field,
                    &self.bounce,
                ) {
                    Ok(traj) => traj,
                    Err(Error::NoBounce { .. }) => {
                        lost = true;
                        state = AtomState { z: 0.0, ..impact };
                        break;
                    }
                    Err(e) => return Err(e),
                };
                let mut exit = traj.exit;
                if self.bounce.scatter == ScatterMode::Tally {
                    let gained = exit.scattered - impact.scattered;
                    exit = apply_recoil_statistics(
                        &exit,
                        gained,
                        &self.field,
                        &self.setup.species,
                        RecoilMode::Stochastic,
                        &mut recoil_rng,
                    );
                }
                state = apply_systematics(&exit, &self.setup.systematics, impact.v_z);
                // Empirical extra kick standing in for surface-roughness scattering.
                state.v_x += self.setup.systematics.roughness_offset_recoils
                    * self.field.recoil_velocity_x(&self.setup.species);
                t = traj.exit_time;
                bounces += 1;
            }
            let snap = if lost || t_snap <= t {
                state
            } else {
                free_flight(&state, t_snap - t, self.gravity)
            };
            out.push(AtomRecord {
                atom_id: id,
                state: snap,
                initial_vx: initial.v_x,
                bounces,
                lost,
                reached_mirror: reached,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomRecord {
    pub atom_id: u64,
    pub state: AtomState,
    pub initial_vx: f64,
    pub bounces: u32,
    /// Hit the surface without being reflected.
    pub lost: bool,
    pub reached_mirror: bool,
}

impl AtomRecord {
    pub fn bounced(&self) -> bool {
        self.bounces > 0
    }

    /// Atoms that are still free (not stuck on the surface).
    pub fn visible(&self) -> bool {
        !self.lost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub atoms: Vec<AtomRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudRun {
    pub snapshots: Vec<Snapshot>,
    pub total: usize,
    pub reached_mirror: usize,
    pub bounced: usize,
    pub lost: usize,
    /// Bounced over atoms that reached the mirror by the last snapshot.
    pub bounce_fraction: f64,
    /// Set when no atom bounced.
    pub no_bounce: bool,
}

/// Initial ensemble, mostly for inspection and statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudEnsemble {
    pub atoms: Vec<AtomState>,
    pub temperature: f64,
    pub release_height: f64,
    pub mot_sigma: f64,
    pub seed: u64,
    pub mot_horizontal_offset: f64,
}

impl CloudEnsemble {
    pub fn sample(model: &CloudModel, seed: u64, ensemble: u64) -> Self {
        let atoms = (0..model.setup.atom_count as u64)
            .into_par_iter()
            .map(|id| model.initial_atom(seed, ensemble, id))
            .collect();
        Self {
            atoms,
            temperature: model.setup.temperature,
            release_height: model.setup.release_height,
            mot_sigma: model.setup.mot_sigma,
            seed,
            mot_horizontal_offset: model.setup.systematics.mot_horizontal_offset,
        }
    }
}

/// Simulates ensemble `ensemble` of the cloud and returns snapshots at
/// `times` (seconds after release). Results depend only on the seed, the
/// ensemble id and the setup, never on thread scheduling.
pub fn simulate_cloud(model: &CloudModel, seed: u64, ensemble: u64, times: &[f64]) -> Result<CloudRun> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
    let per_atom: Vec<Vec<AtomRecord>> = (0..model.setup.atom_count as u64)
        .into_par_iter()
        .map(|id| model.evolve(seed, ensemble, id, &sorted))
        .collect::<Result<_>>()?;
    let mut snapshots: Vec<Snapshot> = times
        .iter()
        .map(|&t| Snapshot {
            t,
            atoms: Vec::with_capacity(per_atom.len()),
        })
        .collect();
    for records in &per_atom {
        for (k, rec) in records.iter().enumerate() {
            snapshots[order[k]].atoms.push(*rec);
        }
    }
    let last: Vec<&AtomRecord> = per_atom.iter().filter_map(|r| r.last()).collect();
    let reached = last.iter().filter(|r| r.reached_mirror).count();
    let bounced = last.iter().filter(|r| r.bounced()).count();
    let lost = last.iter().filter(|r| r.lost && !r.bounced()).count();
    Ok(CloudRun {
        snapshots,
        total: model.setup.atom_count,
        reached_mirror: reached,
        bounced,
        lost,
        bounce_fraction: if reached > 0 {
            bounced as f64 / reached as f64
        } else {
            0.0
        },
        no_bounce: bounced == 0,
    })
}

/// Barrier height at the beam center, for reporting.
pub fn center_barrier(model: &CloudModel) -> Result<f64> {
    Ok(barrier_top(&model.potential)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fall_time;
    use crate::mirror::{bounce_fraction, cloud_sigma_at};
    use crate::optics::Polarization;

    fn setup(atoms: usize) -> CloudSetup {
        let species = AtomSpecies::rb87_d2();
        let detuning = 44.0 * species.linewidth;
        CloudSetup {
            geometry: EwGeometry::above_critical(1.51, 15.2e-3, 335e-6, 19e-3, Polarization::TM)
                .unwrap(),
            species,
            detuning,
            potential: PotentialOptions::default(),
            temperature: 10e-6,
            release_height: 6.6e-3,
            mot_sigma: 0.3e-3,
            systematics: Systematics::default(),
            atom_count: atoms,
            recoil_mode: RecoilMode::Deterministic,
            membership: Membership::SoftEdge,
            scattering: true,
            rate_scale: 1.0,
            bounce: BounceOptions::default(),
            max_bounces: 4,
        }
    }

    #[test]
    fn initial_velocity_statistics() {
        let model = CloudModel::new(setup(20_000)).unwrap();
        let ens = CloudEnsemble::sample(&model, 9, 0);
        let n = ens.atoms.len() as f64;
        let expected = BOLTZMANN * 10e-6 / model.setup.species.mass;
        for comp in [|a: &AtomState| a.v_x, |a: &AtomState| a.v_y, |a: &AtomState| a.v_z] {
            let mean = ens.atoms.iter().map(comp).sum::<f64>() / n;
            let var = ens.atoms.iter().map(|a| (comp(a) - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var - expected).abs() < 5.0 * expected * (2.0 / n).sqrt());
        }
    }

    #[test]
    fn deterministic_and_partition_independent() {
        let model = CloudModel::new(setup(400)).unwrap();
        let times = [0.05, 0.02];
        let a = simulate_cloud(&model, 5, 3, &times).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate_cloud(&model, 5, 3, &times).unwrap());
        assert_eq!(a, b);
        let serial: Vec<AtomRecord> = (0..400)
            .map(|id| model.evolve(5, 3, id, &[0.02, 0.05]).unwrap()[1])
            .collect();
        assert_eq!(a.snapshots[0].atoms, serial);
        assert_eq!(a.snapshots[1].t, 0.02);
    }

    #[test]
    fn fraction_against_disk_model() {
        let model = CloudModel::new(setup(4000)).unwrap();
        let run = simulate_cloud(&model, 11, 0, &[0.06]).unwrap();
        assert_eq!(run.reached_mirror, run.total);
        let t_b = fall_time(6.6e-3);
        let sigma = cloud_sigma_at(0.3e-3, 10e-6, model.setup.species.mass, t_b);
        let disk = bounce_fraction(sigma, 0.0, model.r_eff).unwrap();
        let err = (disk * (1.0 - disk) / run.total as f64).sqrt();
        assert!((run.bounce_fraction - disk).abs() < 5.0 * err + 0.01, "{} {}", run.bounce_fraction, disk);
        // Of order the typical experimental fraction.
        assert!(run.bounce_fraction > 0.13 / 3.0 && run.bounce_fraction < 0.13 * 3.0);
    }

    #[test]
    fn mean_kick_of_bounced_atoms() {
        let mut s = setup(3000);
        s.temperature = 1e-9;
        s.mot_sigma = 1e-6;
        let model = CloudModel::new(s).unwrap();
        let run = simulate_cloud(&model, 1, 0, &[0.05]).unwrap();
        assert_eq!(run.bounced, run.total);
        let v_kx = model.field.recoil_velocity_x(&model.setup.species);
        let p = crate::dynamics::incident_momentum(&model.setup.species, 6.6e-3).momentum;
        let n = crate::budget::nscat_path_integral(&model.setup.species, &model.field, &model.potential, p)
            .unwrap();
        for a in &run.snapshots[0].atoms {
            let recoils = (a.state.v_x - a.initial_vx) / v_kx;
            assert!((recoils / n - 1.0).abs() < 5e-3, "{recoils} {n}");
        }
    }

    #[test]
    fn offset_mirror_selects_velocity() {
        let mut s = setup(20_000);
        s.systematics.mot_horizontal_offset = 1e-3;
        s.scattering = false;
        let model = CloudModel::new(s).unwrap();
        let run = simulate_cloud(&model, 4, 0, &[0.05]).unwrap();
        let bounced: Vec<_> = run.snapshots[0].atoms.iter().filter(|a| a.bounced()).collect();
        assert!(bounced.len() > 100);
        let mean = bounced.iter().map(|a| a.initial_vx).sum::<f64>() / bounced.len() as f64;
        // Cloud sits at +x, so reflected atoms were moving towards −x.
        let sv = model.velocity_sigma();
        assert!(mean < -3.0 * sv / (bounced.len() as f64).sqrt(), "{mean}");
    }

    #[test]
    fn horizontal_motion_uniform_without_forces() {
        let mut s = setup(50);
        s.scattering = false;
        let model = CloudModel::new(s).unwrap();
        let times = [0.001, 0.01, 0.02, 0.03];
        let run = simulate_cloud(&model, 2, 0, &times).unwrap();
        for id in 0..50 {
            if run.snapshots[3].atoms[id].reached_mirror {
                continue;
            }
            let xs: Vec<f64> = run.snapshots.iter().map(|s| s.atoms[id].state.x).collect();
            let v = (xs[3] - xs[0]) / (times[3] - times[0]);
            for (x, t) in xs.iter().zip(times) {
                assert!((x - (xs[0] + v * (t - times[0]))).abs() < 1e-15, "{}", x - (xs[0] + v * (t - times[0])));
            }
        }
    }
}
