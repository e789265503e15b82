//! Gate-level operations of the digital protocol and their action on states.
//!
//! The gate alphabet is deliberately small, matching what the target hardware
//! natively provides:
//!
//! - `MS_XX(A, θ)`   — entangling Mølmer–Sørensen block
//!   `exp(-i θ Σ_{k<l ∈ A} σˣ_k σˣ_l)` on the active set `A`; `θ = J₀ · duration`;
//! - `LOCAL_Y(φ)`    — collective rotation `exp(-i φ Σ_j σʸ_j)` over all
//!   currently active (non-hidden) sites;
//! - `LOCAL_Z({φ_n})` — addressed phases `exp(-i Σ_n φ_n σᶻ_n)`;
//! - `HIDE(S)` / `UNHIDE(S)` — transfer sites to/from auxiliary levels so the
//!   entangling interaction skips them.
//!
//! `MS_XX` and `LOCAL_Y` must not touch hidden sites; `LOCAL_Z` may, because
//! it also models environmental dephasing, which acts on hidden ions as well
//! (at its own strength, see [`crate::noise`]).

use num_complex::Complex64;

use crate::engine::StateVector;
use crate::error::{Error, Result};

/// One protocol operation. `duration` is the wall-clock window length; it is
/// zero for local rotations (assumed instantaneous) and for hide/unhide
/// transfers.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    MsXx { sites: Vec<usize>, theta: f64 },
    LocalY { angle: f64 },
    LocalZ { angles: Vec<(usize, f64)> },
    Hide { sites: Vec<usize> },
    Unhide { sites: Vec<usize> },
}

impl GateOp {
    pub fn ms(sites: Vec<usize>, theta: f64, duration: f64) -> Self {
        Self {
            kind: GateKind::MsXx { sites, theta },
            duration,
        }
    }

    pub fn local_y(angle: f64) -> Self {
        Self {
            kind: GateKind::LocalY { angle },
            duration: 0.0,
        }
    }

    pub fn local_z(angles: Vec<(usize, f64)>) -> Self {
        Self {
            kind: GateKind::LocalZ { angles },
            duration: 0.0,
        }
    }

    pub fn hide(sites: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Hide { sites },
            duration: 0.0,
        }
    }

    pub fn unhide(sites: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Unhide { sites },
            duration: 0.0,
        }
    }
}

/// An ordered gate list compiled for a chain of `n_sites` ions with native
/// coupling `j0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    pub n_sites: usize,
    pub j0: f64,
    pub gates: Vec<GateOp>,
}

impl GateSequence {
    pub fn new(n_sites: usize, j0: f64) -> Self {
        Self {
            n_sites,
            j0,
            gates: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Number of entangling (MS) windows.
    pub fn entangling_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::MsXx { .. }))
            .count()
    }

    /// Line-oriented text form: `KIND site-list angle` per gate, preceded by
    /// a header comment. Angles use shortest round-trip float formatting.
    pub fn to_text(&self) -> String {
        let mut out = format!("# n_sites={} j0={}\n", self.n_sites, self.j0);
        for g in &self.gates {
            match &g.kind {
                GateKind::MsXx { sites, theta } => {
                    out.push_str(&format!("MS_XX {} {}\n", join_sites(sites), theta));
                }
                GateKind::LocalY { angle } => {
                    out.push_str(&format!("LOCAL_Y all {angle}\n"));
                }
                GateKind::LocalZ { angles } => {
                    let sites: Vec<usize> = angles.iter().map(|a| a.0).collect();
                    let vals: Vec<String> =
                        angles.iter().map(|a| a.1.to_string()).collect();
                    out.push_str(&format!(
                        "LOCAL_Z {} {}\n",
                        join_sites(&sites),
                        vals.join(",")
                    ));
                }
                GateKind::Hide { sites } => {
                    out.push_str(&format!("HIDE {} 0\n", join_sites(sites)));
                }
                GateKind::Unhide { sites } => {
                    out.push_str(&format!("UNHIDE {} 0\n", join_sites(sites)));
                }
            }
        }
        out
    }

    /// Parse the text form. MS durations are reconstructed as `θ / j0`, which
    /// holds for compiled (unperturbed) sequences.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_sites = None;
        let mut j0 = 1.0;
        let mut gates = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("n_sites=") {
                        n_sites = Some(v.parse::<usize>().map_err(|_| bad_line(lineno))?);
                    } else if let Some(v) = tok.strip_prefix("j0=") {
                        j0 = v.parse::<f64>().map_err(|_| bad_line(lineno))?;
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().ok_or_else(|| bad_line(lineno))?;
            let sites_tok = parts.next().ok_or_else(|| bad_line(lineno))?;
            let angle_tok = parts.next().ok_or_else(|| bad_line(lineno))?;
            let sites = parse_sites(sites_tok, lineno)?;
            match kind {
                "MS_XX" => {
                    let theta: f64 = angle_tok.parse().map_err(|_| bad_line(lineno))?;
                    gates.push(GateOp::ms(sites, theta, theta / j0));
                }
                "LOCAL_Y" => {
                    let angle: f64 = angle_tok.parse().map_err(|_| bad_line(lineno))?;
                    gates.push(GateOp::local_y(angle));
                }
                "LOCAL_Z" => {
                    let vals: Vec<f64> = angle_tok
                        .split(',')
                        .map(|v| v.parse::<f64>().map_err(|_| bad_line(lineno)))
                        .collect::<Result<_>>()?;
                    if vals.len() != sites.len() {
                        return Err(bad_line(lineno));
                    }
                    gates.push(GateOp::local_z(sites.into_iter().zip(vals).collect()));
                }
                "HIDE" => gates.push(GateOp::hide(sites)),
                "UNHIDE" => gates.push(GateOp::unhide(sites)),
                _ => return Err(bad_line(lineno)),
            }
        }
        let n_sites =
            n_sites.ok_or_else(|| Error::param("sequence", "missing n_sites header"))?;
        Ok(Self { n_sites, j0, gates })
    }
}

fn join_sites(sites: &[usize]) -> String {
    if sites.is_empty() {
        return "all".to_string();
    }
    sites
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_sites(tok: &str, lineno: usize) -> Result<Vec<usize>> {
    if tok == "all" {
        return Ok(Vec::new());
    }
    tok.split(',')
        .map(|v| v.parse::<usize>().map_err(|_| bad_line(lineno)))
        .collect()
}

fn bad_line(lineno: usize) -> Error {
    Error::param("sequence", format!("malformed gate line {}", lineno + 1))
}

/// Which sites currently sit in auxiliary (hiding) levels.
#[derive(Debug, Clone, Default)]
pub struct HiddenSites {
    mask: u64,
}

impl HiddenSites {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_hidden(&self, site: usize) -> bool {
        self.mask >> (site - 1) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn hidden_sites(&self, n_sites: usize) -> Vec<usize> {
        (1..=n_sites).filter(|&s| self.is_hidden(s)).collect()
    }

    pub fn active_sites(&self, n_sites: usize) -> Vec<usize> {
        (1..=n_sites).filter(|&s| !self.is_hidden(s)).collect()
    }

    fn hide(&mut self, sites: &[usize]) -> Result<()> {
        for &s in sites {
            if self.is_hidden(s) {
                return Err(Error::Protocol(format!("site {s} is already hidden")));
            }
            self.mask |= 1 << (s - 1);
        }
        Ok(())
    }

    fn unhide(&mut self, sites: &[usize]) -> Result<()> {
        for &s in sites {
            if !self.is_hidden(s) {
                return Err(Error::Protocol(format!("site {s} is not hidden")));
            }
            self.mask &= !(1 << (s - 1));
        }
        Ok(())
    }
}

/// Apply one gate in place, updating the hidden-site tracker.
pub fn apply_gate(gate: &GateOp, psi: &mut StateVector, hidden: &mut HiddenSites) -> Result<()> {
    let n = psi.n_sites();
    match &gate.kind {
        GateKind::MsXx { sites, theta } => {
            if sites.is_empty() {
                return Err(Error::Protocol("MS gate with empty active set".into()));
            }
            check_sites(sites, n)?;
            for &s in sites {
                if hidden.is_hidden(s) {
                    return Err(Error::Protocol(format!(
                        "MS gate touches hidden site {s}"
                    )));
                }
            }
            ms_xx(psi, sites, *theta);
        }
        GateKind::LocalY { angle } => {
            let active = hidden.active_sites(n);
            for &s in &active {
                rotate_y(psi, s, *angle);
            }
        }
        GateKind::LocalZ { angles } => {
            for &(s, phi) in angles {
                if s == 0 || s > n {
                    return Err(Error::Protocol(format!("LOCAL_Z site {s} out of range")));
                }
                phase_z(psi, s, phi);
            }
        }
        GateKind::Hide { sites } => {
            check_sites(sites, n)?;
            hidden.hide(sites)?;
        }
        GateKind::Unhide { sites } => {
            check_sites(sites, n)?;
            hidden.unhide(sites)?;
        }
    }
    Ok(())
}

/// Apply a whole sequence from the all-active configuration; errors if any
/// hide/unhide pair is left unbalanced at the end.
pub fn apply_sequence(seq: &GateSequence, psi: &mut StateVector) -> Result<()> {
    if seq.n_sites != psi.n_sites() {
        return Err(Error::SizeMismatch(format!(
            "sequence on {} sites, state on {}",
            seq.n_sites,
            psi.n_sites()
        )));
    }
    let mut hidden = HiddenSites::none();
    for g in &seq.gates {
        apply_gate(g, psi, &mut hidden)?;
    }
    if !hidden.is_empty() {
        return Err(Error::Protocol(format!(
            "sequence ended with hidden sites {:?}",
            hidden.hidden_sites(seq.n_sites)
        )));
    }
    Ok(())
}

fn check_sites(sites: &[usize], n: usize) -> Result<()> {
    for &s in sites {
        if s == 0 || s > n {
            return Err(Error::Protocol(format!("site {s} out of range 1..={n}")));
        }
    }
    Ok(())
}

/// `exp(-i φ σʸ)` on one site.
fn rotate_y(psi: &mut StateVector, site: usize, phi: f64) {
    let n = psi.n_sites();
    let bit = 1usize << (n - site);
    let (c, s) = (phi.cos(), phi.sin());
    let amps = psi.amps_mut();
    for i in 0..amps.len() {
        if i & bit == 0 {
            let down = amps[i];
            let up = amps[i | bit];
            amps[i | bit] = c * up - s * down;
            amps[i] = s * up + c * down;
        }
    }
}

/// `exp(-i φ σᶻ)` on one site: phase `e^{∓iφ}` on up/down amplitudes.
fn phase_z(psi: &mut StateVector, site: usize, phi: f64) {
    let n = psi.n_sites();
    let bit = 1usize << (n - site);
    let up = Complex64::from_polar(1.0, -phi);
    let down = Complex64::from_polar(1.0, phi);
    let amps = psi.amps_mut();
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if i & bit == 0 { down } else { up };
    }
}

/// `exp(-i θ Σ_{k<l ∈ A} σˣ_k σˣ_l)`: rotate the active sites so σˣ maps to
/// σᶻ, apply the diagonal pair phase via popcounts, rotate back.
fn ms_xx(psi: &mut StateVector, sites: &[usize], theta: f64) {
    let n = psi.n_sites();
    let k = sites.len();
    let mut mask = 0usize;
    for &s in sites {
        mask |= 1 << (n - s);
    }
    // sigma_x = R sigma_z R^dagger with R = exp(-i pi/4 sigma_y); apply
    // R^dagger first, the diagonal, then R.
    for &s in sites {
        rotate_y(psi, s, -std::f64::consts::FRAC_PI_4);
    }
    // pair sum for p up-spins among k active: ((2p - k)^2 - k) / 2
    let phases: Vec<Complex64> = (0..=k)
        .map(|p| {
            let m = (2 * p) as f64 - k as f64;
            Complex64::from_polar(1.0, -theta * 0.5 * (m * m - k as f64))
        })
        .collect();
    let amps = psi.amps_mut();
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= phases[(i & mask).count_ones() as usize];
    }
    for &s in sites {
        rotate_y(psi, s, std::f64::consts::FRAC_PI_4);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bare_vacuum, BasisState};

    fn random_state(n: usize, seed: u64) -> StateVector {
        // cheap deterministic pseudo-random amplitudes for unit tests
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps = (0..(1usize << n))
            .map(|_| Complex64::new(next(), next()))
            .collect();
        StateVector::from_amplitudes(n, amps).unwrap()
    }

    #[test]
    fn y_rotations_compose() {
        let mut a = random_state(3, 7);
        let mut b = a.clone();
        let mut hidden = HiddenSites::none();
        apply_gate(&GateOp::local_y(0.25), &mut a, &mut hidden).unwrap();
        apply_gate(&GateOp::local_y(0.25), &mut a, &mut hidden).unwrap();
        apply_gate(&GateOp::local_y(0.5), &mut b, &mut HiddenSites::none()).unwrap();
        let dist: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dist < 1e-13, "group property violated: {dist:.2e}");
    }

    #[test]
    fn ms_with_zero_angle_is_identity() {
        let mut psi = random_state(4, 3);
        let before = psi.clone();
        let mut hidden = HiddenSites::none();
        apply_gate(&GateOp::ms(vec![1, 2], 0.0, 0.0), &mut psi, &mut hidden).unwrap();
        let dist: f64 = psi
            .amplitudes()
            .iter()
            .zip(before.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dist < 1e-13);
    }

    #[test]
    fn ms_two_qubit_matrix_elements() {
        // exp(-i t XX) maps |dd> to cos(t)|dd> - i sin(t)|uu>
        let theta = 0.3;
        let dd = BasisState::new(vec![-1, -1]).unwrap();
        let mut psi = StateVector::basis(&dd);
        apply_gate(
            &GateOp::ms(vec![1, 2], theta, 0.0),
            &mut psi,
            &mut HiddenSites::none(),
        )
        .unwrap();
        let uu = BasisState::new(vec![1, 1]).unwrap().index();
        let a_dd = psi.amplitudes()[dd.index()];
        let a_uu = psi.amplitudes()[uu];
        assert!((a_dd - Complex64::from(theta.cos())).norm() < 1e-13);
        assert!((a_uu - Complex64::new(0.0, -theta.sin())).norm() < 1e-13);
    }

    #[test]
    fn gates_preserve_norm() {
        let mut psi = random_state(5, 11);
        let mut hidden = HiddenSites::none();
        let gates = [
            GateOp::local_y(0.3),
            GateOp::ms(vec![1, 2, 3], 0.7, 0.1),
            GateOp::local_z(vec![(1, 0.2), (4, -0.9)]),
            GateOp::ms(vec![2, 5], 1.3, 0.2),
        ];
        for g in &gates {
            apply_gate(g, &mut psi, &mut hidden).unwrap();
        }
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hidden_site_rejected_for_ms() {
        let mut psi = StateVector::basis(&bare_vacuum(4).unwrap());
        let mut hidden = HiddenSites::none();
        apply_gate(&GateOp::hide(vec![3, 4]), &mut psi, &mut hidden).unwrap();
        let err = apply_gate(&GateOp::ms(vec![2, 3], 0.1, 0.0), &mut psi, &mut hidden);
        assert!(matches!(err, Err(Error::Protocol(_))));
    }

    #[test]
    fn local_y_skips_hidden_sites() {
        // hiding sites 2..N and rotating acts like a single-site rotation
        let mut a = StateVector::basis(&bare_vacuum(4).unwrap());
        let mut hidden = HiddenSites::none();
        apply_gate(&GateOp::hide(vec![2, 3, 4]), &mut a, &mut hidden).unwrap();
        apply_gate(&GateOp::local_y(0.4), &mut a, &mut hidden).unwrap();
        apply_gate(&GateOp::unhide(vec![2, 3, 4]), &mut a, &mut hidden).unwrap();

        let mut b = StateVector::basis(&bare_vacuum(4).unwrap());
        super::rotate_y(&mut b, 1, 0.4);
        let dist: f64 = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(dist < 1e-14);
    }

    #[test]
    fn unbalanced_sequence_is_rejected() {
        let mut seq = GateSequence::new(4, 1.0);
        seq.gates.push(GateOp::hide(vec![1]));
        let mut psi = StateVector::basis(&bare_vacuum(4).unwrap());
        assert!(apply_sequence(&seq, &mut psi).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let mut seq = GateSequence::new(4, 2.0);
        seq.gates.push(GateOp::local_y(-0.325));
        seq.gates.push(GateOp::hide(vec![3, 4]));
        seq.gates.push(GateOp::ms(vec![1, 2], 0.125, 0.0625));
        seq.gates.push(GateOp::unhide(vec![3, 4]));
        seq.gates.push(GateOp::local_z(vec![(1, 0.5), (2, -0.25)]));
        let text = seq.to_text();
        let back = GateSequence::from_text(&text).unwrap();
        assert_eq!(back, seq);
    }
}
