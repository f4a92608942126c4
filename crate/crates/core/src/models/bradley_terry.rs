use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result, check_finite, check_len};
use crate::geometry::{DualGradientObjective, DuallyFlatModel, EtaCoords, ExpFamilyNll, Gradient, Point, ThetaCoords};
use crate::linalg::{Matrix, dot, norm_inf, spd_inverse, spd_solve};

/// Bradley–Terry model for `N` players with a fixed schedule of match counts.
///
/// With strengths `π` (positive, summing to one) player `i` beats `j` with
/// probability `π_i / (π_i + π_j)`. Natural coordinates are
/// `θⁱ = log(π_i / π_N)` for `i < N` (so `θᴺ = 0`) and the potential is
/// `ψ(θ) = Σ_{i<j} n_ij log(exp θⁱ + exp θʲ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BradleyTerryModel {
    players: usize,
    // row-major N×N symmetric schedule with zero diagonal
    games: Vec<u32>,
}

/// Observed wins `x_ij` with `x_ij + x_ji = n_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct BtObservation {
    players: usize,
    wins: Vec<u32>,
}

impl BtObservation {
    pub fn wins(&self, i: usize, j: usize) -> u32 {
        self.wins[i * self.players + j]
    }

    pub fn players(&self) -> usize {
        self.players
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl BradleyTerryModel {
    /// Builds the model from an `N × N` row-major table of match counts.
    pub fn new(players: usize, games: Vec<u32>) -> Result<Self> {
        if players < 2 {
            return Err(Error::InvalidModel(format!(
                "Bradley-Terry needs at least two players, got {players}"
            )));
        }
        check_len(players * players, games.len())?;
        for i in 0..players {
            if games[i * players + i] != 0 {
                return Err(Error::InvalidModel(format!("player {i} has games against itself")));
            }
            for j in 0..i {
                if games[i * players + j] != games[j * players + i] {
                    return Err(Error::InvalidModel(format!("match counts not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { players, games })
    }

    /// Builds the schedule and the observation from a win table `x_ij`.
    pub fn from_wins(players: usize, wins: Vec<u32>) -> Result<(Self, BtObservation)> {
        check_len(players * players, wins.len())?;
        let games = Matrix::from_fn(players, players, |i, j| {
            if i == j {
                0.0
            } else {
                f64::from(wins[i * players + j]) + f64::from(wins[j * players + i])
            }
        });
        let games: Vec<u32> = games.as_slice().iter().map(|&g| g as u32).collect();
        let model = Self::new(players, games)?;
        let obs = model.observation(wins)?;
        Ok((model, obs))
    }

    /// Validates a win table against the schedule.
    pub fn observation(&self, wins: Vec<u32>) -> Result<BtObservation> {
        let n = self.players;
        check_len(n * n, wins.len())?;
        for i in 0..n {
            if wins[i * n + i] != 0 {
                return Err(Error::InvalidInput(format!("player {i} has wins against itself")));
            }
            for j in 0..i {
                let total = u64::from(wins[i * n + j]) + u64::from(wins[j * n + i]);
                if total != u64::from(self.games(i, j)) {
                    return Err(Error::InvalidInput(format!(
                        "x_{i}{j} + x_{j}{i} = {total} does not match n_{i}{j} = {}",
                        self.games(i, j)
                    )));
                }
            }
        }
        Ok(BtObservation { players: n, wins })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn games(&self, i: usize, j: usize) -> u32 {
        self.games[i * self.players + j]
    }

    fn games_f(&self, i: usize, j: usize) -> f64 {
        f64::from(self.games(i, j))
    }

    pub fn theta(&self, values: &[f64]) -> Result<ThetaCoords> {
        check_len(self.dim(), values.len())?;
        ThetaCoords::new(values.to_vec())
    }

    // θ padded with θᴺ = 0
    fn full_theta(&self, theta: &ThetaCoords) -> Result<Vec<f64>> {
        check_len(self.dim(), theta.len())?;
        let mut full = theta.as_slice().to_vec();
        full.push(0.0);
        Ok(full)
    }

    /// Win totals `T_i(x) = Σ_{j≠i} x_ij` for all `N` players.
    pub fn sufficient_statistics(&self, obs: &BtObservation) -> Vec<f64> {
        let n = self.players;
        (0..n)
            .map(|i| (0..n).map(|j| f64::from(obs.wins[i * n + j])).sum())
            .collect()
    }

    /// `π_i = exp θⁱ / (1 + Σ_k exp θᵏ)`, all `N` entries.
    pub fn pi_from_theta(&self, theta: &ThetaCoords) -> Result<Vec<f64>> {
        let full = self.full_theta(theta)?;
        let max = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = full.iter().map(|t| (t - max).exp()).collect();
        let total: f64 = e.iter().sum();
        Ok(e.into_iter().map(|v| v / total).collect())
    }

    /// `θⁱ = log(π_i / π_N)` from a positive strength vector of length `N`.
    pub fn theta_from_pi(&self, pi: &[f64]) -> Result<ThetaCoords> {
        check_len(self.players, pi.len())?;
        if pi.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::OutOfDomain("Bradley-Terry strengths"));
        }
        let last = pi[self.players - 1];
        ThetaCoords::new(pi[..self.players - 1].iter().map(|p| (p / last).ln()).collect())
    }

    /// Negative log-likelihood in `θ`: `ψ(θ) − Σ θⁱ T_i`.
    pub fn nll(&self, obs: &BtObservation) -> Result<BtNll> {
        if obs.players != self.players {
            return Err(Error::DimensionMismatch {
                expected: self.players,
                got: obs.players,
            });
        }
        let mut stats = self.sufficient_statistics(obs);
        stats.pop();
        Ok(BtNll {
            inner: ExpFamilyNll::new(stats, 1.0)?,
            obs: obs.clone(),
        })
    }

    /// `−Σ_{i<j} [x_ij log π_i + x_ji log π_j − n_ij log(π_i + π_j)]`.
    pub fn nll_pi(&self, obs: &BtObservation, pi: &[f64]) -> Result<f64> {
        self.check_pi(pi)?;
        let n = self.players;
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let g = self.games_f(i, j);
                if g == 0.0 {
                    continue;
                }
                let xij = f64::from(obs.wins(i, j));
                let xji = f64::from(obs.wins(j, i));
                total -= xij * pi[i].ln() + xji * pi[j].ln() - g * (pi[i] + pi[j]).ln();
            }
        }
        Ok(total)
    }

    fn check_pi(&self, pi: &[f64]) -> Result<()> {
        check_len(self.players, pi.len())?;
        if pi.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::OutOfDomain("Bradley-Terry strengths"));
        }
        Ok(())
    }

    /// Unconstrained gradient of [`nll_pi`](Self::nll_pi) in `ℝᴺ`:
    /// `−T_i/π_i + Σ_{j≠i} n_ij/(π_i + π_j)`.
    pub fn nll_full_gradient_pi(&self, obs: &BtObservation, pi: &[f64]) -> Result<Vec<f64>> {
        check_len(self.players, pi.len())?;
        let n = self.players;
        let stats = self.sufficient_statistics(obs);
        Ok((0..n)
            .map(|i| {
                let pairs: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.games_f(i, j) / (pi[i] + pi[j]))
                    .sum();
                -stats[i] / pi[i] + pairs
            })
            .collect())
    }

    /// Gradient with respect to `π₁..π_{N−1}` with `π_N = 1 − Σ_{i<N} π_i`.
    ///
    /// `pi` holds all `N` strengths; the last one is recomputed from the
    /// others so that the result is the derivative along the simplex.
    pub fn nll_grad_pi(&self, obs: &BtObservation, pi: &[f64]) -> Result<Vec<f64>> {
        self.check_pi(pi)?;
        let n = self.players;
        let mut constrained = pi.to_vec();
        constrained[n - 1] = 1.0 - pi[..n - 1].iter().sum::<f64>();
        if !(constrained[n - 1] > 0.0) {
            return Err(Error::OutOfDomain("Bradley-Terry strengths"));
        }
        let full = self.nll_full_gradient_pi(obs, &constrained)?;
        let last = full[n - 1];
        Ok(full[..n - 1].iter().map(|g| g - last).collect())
    }

    /// Whether the comparison graph is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.players;
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, visited) in seen.iter_mut().enumerate() {
                if !*visited && self.games(i, j) > 0 {
                    *visited = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn total_games(&self) -> f64 {
        let n = self.players;
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.games_f(i, j))
            .sum()
    }
}

const THETA_SOLVE_TOL: f64 = 1e-10;
const THETA_SOLVE_MAX_ITERS: usize = 200;
const EXHAUSTIVE_DOMAIN_PLAYERS: usize = 16;

impl DuallyFlatModel for BradleyTerryModel {
    fn dim(&self) -> usize {
        self.players - 1
    }

    fn psi(&self, theta: &ThetaCoords) -> Result<f64> {
        let full = self.full_theta(theta)?;
        let n = self.players;
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let g = self.games_f(i, j);
                if g > 0.0 {
                    total += g * log_add_exp(full[i], full[j]);
                }
            }
        }
        Ok(total)
    }

    /// `η_i = Σ_{j≠i} n_ij σ(θⁱ − θʲ)`, the expected number of wins.
    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords> {
        let full = self.full_theta(theta)?;
        let n = self.players;
        EtaCoords::new(
            (0..n - 1)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| self.games_f(i, j) * logistic(full[i] - full[j]))
                        .sum()
                })
                .collect(),
        )
    }

    /// Damped Newton on the convex problem `min ψ(θ) − θ·η`.
    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords> {
        check_len(self.dim(), eta.len())?;
        if !self.eta_in_domain(eta) {
            return Err(Error::OutOfDomain("Bradley-Terry eta"));
        }
        let target = eta.as_slice();
        let mut theta = ThetaCoords::new(vec![0.0; self.dim()])?;
        let objective = |t: &ThetaCoords| -> Result<f64> { Ok(self.psi(t)? - dot(t.as_slice(), target)) };
        let mut value = objective(&theta)?;
        let scale = 1.0 + self.total_games();
        for _ in 0..THETA_SOLVE_MAX_ITERS {
            let current = self.eta_from_theta(&theta)?;
            let grad: Vec<f64> = current.as_slice().iter().zip(target).map(|(a, b)| a - b).collect();
            if norm_inf(&grad) < THETA_SOLVE_TOL * scale {
                return Ok(theta);
            }
            let dir = spd_solve(&self.metric_theta(&theta)?, &grad)?;
            let grad_norm = norm_inf(&grad);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let candidate =
                    ThetaCoords::new(theta.as_slice().iter().zip(&dir).map(|(x, d)| x - step * d).collect())?;
                let v = objective(&candidate)?;
                let cand_grad = self.eta_from_theta(&candidate)?;
                let cand_norm = cand_grad
                    .as_slice()
                    .iter()
                    .zip(target)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                if v < value || cand_norm < grad_norm {
                    theta = candidate;
                    value = v;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        Err(Error::NoConvergence {
            what: "Bradley-Terry eta inversion",
            iterations: THETA_SOLVE_MAX_ITERS,
        })
    }

    /// Diagonal `Σ_{j≠i} n_ij s_ij (1 − s_ij)`, off-diagonal
    /// `−n_ik s_ik (1 − s_ik)`, with `s_ij = σ(θⁱ − θʲ)`.
    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix> {
        let full = self.full_theta(theta)?;
        let n = self.players;
        let m = n - 1;
        let weight = |i: usize, j: usize| {
            let s = logistic(full[i] - full[j]);
            self.games_f(i, j) * s * (1.0 - s)
        };
        Ok(Matrix::from_fn(m, m, |i, k| {
            if i == k {
                (0..n).filter(|&j| j != i).map(|j| weight(i, j)).sum()
            } else {
                -weight(i, k)
            }
        }))
    }

    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix> {
        spd_inverse(&self.metric_theta(&self.theta_from_eta(eta)?)?)
    }

    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        theta.len() == self.dim() && theta.as_slice().iter().all(|t| t.is_finite())
    }

    /// Interior of the polytope of achievable win totals: every proper subset
    /// `S` of players must win strictly more than the games played inside `S`.
    ///
    /// Checked exhaustively up to 16 players; above that, membership is
    /// decided by whether the inverse map converges.
    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        if eta.len() != self.dim() || !self.is_connected() {
            return false;
        }
        let n = self.players;
        let mut totals = eta.as_slice().to_vec();
        totals.push(self.total_games() - totals.iter().sum::<f64>());
        if n > EXHAUSTIVE_DOMAIN_PLAYERS {
            return self.theta_from_eta(eta).is_ok();
        }
        let margin = crate::geometry::DOMAIN_MARGIN * (1.0 + self.total_games());
        for mask in 1u32..((1u32 << n) - 1) {
            let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let won: f64 = members.iter().map(|&i| totals[i]).sum();
            let inside: f64 = members
                .iter()
                .flat_map(|&i| members.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
                .map(|(i, j)| self.games_f(i, j))
                .sum();
            if !(won > inside + margin) {
                return false;
            }
        }
        true
    }
}

/// Negative log-likelihood of a Bradley–Terry observation in the natural
/// chart, exposing the strength-space gradient used by the stopping rule.
#[derive(Debug, Clone)]
pub struct BtNll {
    inner: ExpFamilyNll,
    obs: BtObservation,
}

impl BtNll {
    pub fn observation(&self) -> &BtObservation {
        &self.obs
    }
}

impl DualGradientObjective<BradleyTerryModel> for BtNll {
    fn value(&self, model: &BradleyTerryModel, p: &Point) -> Result<f64> {
        self.inner.value(model, p)
    }

    fn gradient(&self, model: &BradleyTerryModel, p: &Point) -> Result<Gradient> {
        self.inner.gradient(model, p)
    }

    fn pi_gradient(&self, model: &BradleyTerryModel, p: &Point) -> Option<Result<Vec<f64>>> {
        Some(p.theta(model).and_then(|t| model.pi_from_theta(t)).and_then(|pi| {
            check_finite(&pi, "strengths")?;
            model.nll_grad_pi(&self.obs, &pi)
        }))
    }
}

/// The three-player data set with `x₁₂ = 7, x₁₃ = 8, x₂₁ = 3, x₂₃ = 5,
/// x₃₁ = 2, x₃₂ = 5` (ten games per pair).
pub fn three_player_example() -> (BradleyTerryModel, BtObservation) {
    let wins = vec![0, 7, 8, 3, 0, 5, 2, 5, 0];
    BradleyTerryModel::from_wins(3, wins).expect("valid example")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::oracle;
    use crate::linalg::{max_abs_diff, symmetric_eigenvalues};

    #[test]
    fn sufficient_statistics_of_small_example() {
        let (model, obs) = three_player_example();
        assert_eq!(model.sufficient_statistics(&obs), vec![15.0, 8.0, 7.0]);
        assert_eq!(model.games(0, 1), 10);
        assert_eq!(model.games(2, 1), 10);
    }

    #[test]
    fn eta_at_origin_is_half_the_games() {
        let (model, _) = three_player_example();
        let eta = model.eta_from_theta(&model.theta(&[0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(eta.as_slice(), &[10.0, 10.0]);
        let pi = model.pi_from_theta(&model.theta(&[0.0, 0.0]).unwrap()).unwrap();
        assert!(max_abs_diff(&pi, &[1.0 / 3.0; 3]) < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (model, _) = three_player_example();
        let theta = [0.7, -0.4];
        let psi = |x: &[f64]| model.psi(&ThetaCoords::new(x.to_vec())?);
        let fd = oracle::fd_gradient_scaled(psi, &theta).unwrap();
        let eta = model.eta_from_theta(&model.theta(&theta).unwrap()).unwrap();
        assert!(oracle::relative_error(eta.as_slice(), &fd) < 1e-4);
        let hess = oracle::fd_jacobian(
            |x| Ok(model.eta_from_theta(&ThetaCoords::new(x.to_vec())?)?.into_vec()),
            &theta,
        )
        .unwrap();
        let metric = model.metric_theta(&model.theta(&theta).unwrap()).unwrap();
        assert!(oracle::relative_error(metric.as_slice(), hess.as_slice()) < 1e-4);
        assert!(symmetric_eigenvalues(&metric).unwrap()[0] > 0.0);
    }

    #[test]
    fn pi_gradient_matches_finite_differences() {
        let (model, obs) = three_player_example();
        let pi12 = [0.5, 0.2667];
        let full = [pi12[0], pi12[1], 1.0 - pi12[0] - pi12[1]];
        let g = model.nll_grad_pi(&obs, &full).unwrap();
        let fd = oracle::fd_gradient_scaled(|x| model.nll_pi(&obs, &[x[0], x[1], 1.0 - x[0] - x[1]]), &pi12).unwrap();
        assert!(oracle::relative_error(&g, &fd) < 1e-4);
    }

    #[test]
    fn symmetric_results_are_stationary_at_uniform() {
        let wins = vec![0, 5, 3, 5, 0, 4, 3, 4, 0];
        let (model, obs) = BradleyTerryModel::from_wins(3, wins).unwrap();
        let g = model.nll_grad_pi(&obs, &[1.0 / 3.0; 3]).unwrap();
        assert!(norm_inf(&g) < 1e-12);
    }

    #[test]
    fn eta_domain_follows_subset_conditions() {
        let (model, _) = three_player_example();
        assert!(model.eta_in_domain(&EtaCoords::new(vec![15.0, 8.0]).unwrap()));
        // player 1 winning all 20 of its games is on the boundary
        assert!(!model.eta_in_domain(&EtaCoords::new(vec![20.0, 5.0]).unwrap()));
        assert!(!model.eta_in_domain(&EtaCoords::new(vec![0.0, 10.0]).unwrap()));
    }

    #[test]
    fn rejects_inconsistent_tables() {
        assert!(BradleyTerryModel::new(2, vec![0, 3, 2, 0]).is_err());
        let (model, _) = three_player_example();
        assert!(model.observation(vec![0, 7, 8, 4, 0, 5, 2, 5, 0]).is_err());
    }

    #[test]
    fn disconnected_schedule_has_singular_metric() {
        let model = BradleyTerryModel::new(4, vec![0, 2, 0, 0, 2, 0, 0, 0, 0, 0, 0, 3, 0, 0, 3, 0]).unwrap();
        assert!(!model.is_connected());
        let metric = model.metric_theta(&model.theta(&[0.1, 0.0, 0.3]).unwrap()).unwrap();
        assert!(symmetric_eigenvalues(&metric).unwrap()[0].abs() < 1e-12);
    }
}
