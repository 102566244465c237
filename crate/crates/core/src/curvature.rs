//! Berwald and Landsberg curvature: closed forms in `N, U, W` and raw-coordinate oracles.

use serde::Serialize;

use crate::error::{FinslerError, Result};
use crate::jets::Jet;
use crate::metric::{omega, MetricSpec, SamplePoint};
use crate::psi::SzCalc;
use crate::spray::{oracle_spray_jets, raw_f_jet, spray_quantity_jets};
use crate::tensor::{cyclic2, cyclic3, delta, split_zero, BerwaldTensor, LandsbergTensor};

/// Values of the derivative and Ψ-combinations of one spray quantity `Θ ∈ {N, U, W}`
/// that enter the curvature formulas.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ThetaBlocks {
    pub val: f64,
    pub s: f64,
    pub z: f64,
    pub ss: f64,
    pub sz: f64,
    pub zz: f64,
    pub sss: f64,
    pub ssz: f64,
    pub szz: f64,
    pub zzz: f64,
    /// `Ψ(Θ_ss)`, `Ψ(Θ_sz)`, `Ψ(Θ_zz)`, `Ψ(Θ_s)`, `Ψ(Θ_z)`
    pub psi_ss: f64,
    pub psi_sz: f64,
    pub psi_zz: f64,
    pub psi_s: f64,
    pub psi_z: f64,
    /// `∂_s Ψ(Θ_s)`, `∂_z Ψ(Θ_z)`
    pub psis_s: f64,
    pub psiz_z: f64,
    /// `zΨ(Θ/z)`, `zΨ(Θ_s/z)`, `zΨ(Θ_z/z)`
    pub zpsi_0: f64,
    pub zpsi_s: f64,
    pub zpsi_z: f64,
    /// `Ψ(z²Ψ(Θ/z))`, `Ψ(z²Ψ(Θ_s/z))`, `Ψ(z²Ψ(Θ_z/z))`
    pub q_0: f64,
    pub q_s: f64,
    pub q_z: f64,
    /// `Ψ(z²Ψ(Θ_s))`, `Ψ(z²Ψ(Θ_z))`
    pub e_s: f64,
    pub e_z: f64,
    /// `Ψ(zΘ_sz)`
    pub f_sz: f64,
    /// `Ψ(z²Ψ(Θ/z²))` and its `s`-derivative
    pub b2: f64,
    pub b2_s: f64,
    /// `Ψ(z²Ψ(z²Ψ(Θ/z²)))`
    pub c3: f64,
    /// `Ψ(z²Ψ(z²Ψ(Θ/z)))`
    pub w3: f64,
}

impl ThetaBlocks {
    /// Needs `t` of order at least 3.
    pub fn new(c: &SzCalc, t: &Jet) -> ThetaBlocks {
        let p = |x: &Jet| c.psi(x);
        let zp = |x: &Jet, k: i32| c.zpow(x, k);
        let z2p = |x: &Jet| zp(&p(x), 2);
        let ds = |x: &Jet| c.ds(x);
        let dz = |x: &Jet| c.dz(x);
        let ts = ds(t);
        let tz = dz(t);
        let tss = ds(&ts);
        let tsz = dz(&ts);
        let tzz = dz(&tz);
        let b2 = p(&z2p(&zp(t, -2)));
        ThetaBlocks {
            val: t.value(),
            s: ts.value(),
            z: tz.value(),
            ss: tss.value(),
            sz: tsz.value(),
            zz: tzz.value(),
            sss: ds(&tss).value(),
            ssz: dz(&tss).value(),
            szz: dz(&tsz).value(),
            zzz: dz(&tzz).value(),
            psi_ss: p(&tss).value(),
            psi_sz: p(&tsz).value(),
            psi_zz: p(&tzz).value(),
            psi_s: p(&ts).value(),
            psi_z: p(&tz).value(),
            psis_s: c.psi_s(&ts).value(),
            psiz_z: c.psi_z(&tz).value(),
            zpsi_0: zp(&p(&zp(t, -1)), 1).value(),
            zpsi_s: zp(&p(&zp(&ts, -1)), 1).value(),
            zpsi_z: zp(&p(&zp(&tz, -1)), 1).value(),
            q_0: p(&z2p(&zp(t, -1))).value(),
            q_s: p(&z2p(&zp(&ts, -1))).value(),
            q_z: p(&z2p(&zp(&tz, -1))).value(),
            e_s: p(&z2p(&ts)).value(),
            e_z: p(&z2p(&tz)).value(),
            f_sz: p(&zp(&tsz, 1)).value(),
            b2_s: ds(&b2).value(),
            c3: p(&z2p(&z2p(&zp(t, -2)))).value(),
            w3: p(&z2p(&z2p(&zp(t, -1)))).value(),
            b2: b2.value(),
        }
    }
}

/// Everything the closed forms need at one sample point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureInputs {
    pub n: ThetaBlocks,
    pub u_: ThetaBlocks,
    pub w: ThetaBlocks,
    pub phi: f64,
    pub phi_s: f64,
    pub phi_z: f64,
    pub omega: f64,
    pub r: f64,
    pub s: f64,
    pub z: f64,
    /// `|ȳ|`
    pub norm_y: f64,
    /// `x̄` (spatial, 0-based)
    pub x: Vec<f64>,
    /// `ȳ/|ȳ|`
    pub unit: Vec<f64>,
}

impl CurvatureInputs {
    pub fn new(spec: &MetricSpec, p: &SamplePoint) -> Result<CurvatureInputs> {
        let [_, r, s, z] = p.reduced();
        if z == 0.0 {
            return Err(FinslerError::ZDivision);
        }
        let table = spec.phi_table(p)?;
        let q = spray_quantity_jets(&table, 3)?;
        let c = SzCalc::new(3, s, z)?;
        let u = p.u();
        Ok(CurvatureInputs {
            n: ThetaBlocks::new(&c, &q.n),
            u_: ThetaBlocks::new(&c, &q.u),
            w: ThetaBlocks::new(&c, &q.w),
            phi: table.phi(),
            phi_s: table.phi_s(),
            phi_z: table.phi_z(),
            omega: omega(&table),
            r,
            s,
            z,
            norm_y: u,
            x: p.xbar.clone(),
            unit: p.ybar.iter().map(|v| v / u).collect(),
        })
    }

    fn xs(&self, i: usize) -> f64 {
        self.x[i - 1]
    }

    fn us(&self, i: usize) -> f64 {
        self.unit[i - 1]
    }
}

fn b0_component(c: &CurvatureInputs, spatial: &[usize]) -> f64 {
    let nb = &c.n;
    let z = c.z;
    let x = |i| c.xs(i);
    let u = |i| c.us(i);
    let val = match *spatial {
        [] => nb.zzz,
        [l] => nb.szz * x(l) + nb.psi_zz * u(l),
        [k, l] => {
            nb.ssz * x(k) * x(l)
                + nb.psi_sz * (x(l) * u(k) + x(k) * u(l))
                + nb.zpsi_z * delta(k, l)
                + nb.q_z / z * u(k) * u(l)
        }
        [j, k, l] => cyclic3(j, k, l, |j, k, l| {
            nb.sss / 3.0 * x(j) * x(k) * x(l)
                + nb.psi_ss * x(j) * x(k) * u(l)
                + nb.zpsi_s * x(j) * delta(k, l)
                + nb.b2 * u(j) * delta(k, l)
                + nb.q_s / z * x(j) * u(k) * u(l)
                + nb.c3 / (3.0 * z * z) * u(j) * u(k) * u(l)
        }),
        _ => unreachable!(),
    };
    val / c.norm_y
}

fn bi_component(c: &CurvatureInputs, i: usize, spatial: &[usize]) -> f64 {
    let ub = &c.u_;
    let wb = &c.w;
    let z = c.z;
    let x = |i| c.xs(i);
    let u = |i| c.us(i);
    let d = delta;
    let val = match *spatial {
        [] => ub.zzz * x(i) + wb.zzz * u(i),
        [l] => {
            ub.szz * x(l) * x(i)
                + ub.psi_zz * x(i) * u(l)
                + wb.zz * d(i, l)
                + wb.szz * x(l) * u(i)
                + wb.psiz_z * u(l) * u(i)
        }
        [k, l] => {
            ub.ssz * x(k) * x(l) * x(i)
                + ub.zpsi_z * d(k, l) * x(i)
                + ub.q_z / z * u(k) * u(l) * x(i)
                + wb.ssz * x(k) * x(l) * u(i)
                + wb.e_z / (z * z) * u(k) * u(l) * u(i)
                + cyclic2(k, l, |k, l| {
                    ub.psi_sz * u(k) * x(l) * x(i) + wb.sz * x(k) * d(l, i) + wb.f_sz / z * x(l) * u(k) * u(i)
                })
                + wb.psi_z * cyclic3(i, k, l, |i, k, l| d(i, l) * u(k))
        }
        [j, k, l] => {
            let u_part = ub.sss * x(j) * x(k) * x(l)
                + ub.c3 / (z * z) * u(j) * u(k) * u(l)
                + cyclic3(j, k, l, |j, k, l| {
                    ub.psi_ss * u(j) * x(k) * x(l)
                        + ub.zpsi_s * d(j, k) * x(l)
                        + ub.b2_s * u(j) * u(k) * x(l)
                        + ub.b2 * d(j, k) * u(l)
                });
            let w_part = cyclic3(j, k, l, |j, k, l| {
                wb.ss * d(i, j) * x(k) * x(l)
                    + wb.psis_s * u(i) * u(j) * x(k) * x(l)
                    + wb.e_s / (z * z) * x(j) * u(k) * u(l) * u(i)
            }) + wb.zpsi_0 * cyclic3(i, k, l, |i, k, l| d(j, i) * d(k, l))
                + wb.psi_s
                    * (x(j) * cyclic3(i, k, l, |i, k, l| u(i) * d(k, l))
                        + x(k) * cyclic3(i, j, l, |i, j, l| u(j) * d(i, l))
                        + x(l) * cyclic3(i, j, k, |i, j, k| u(i) * d(j, k)))
                + wb.q_0 / z * cyclic3(i, k, l, |i, k, l| d(j, i) * u(k) * u(l) + d(i, k) * u(l) * u(j))
                + wb.sss * x(j) * x(k) * x(l) * u(i)
                + wb.w3 / (z * z * z) * u(j) * u(k) * u(l) * u(i);
            u_part * x(i) + w_part
        }
        _ => unreachable!(),
    };
    val / c.norm_y
}

/// `B^A_{BCD}` from the closed-form components in `N, U, W`.
pub fn berwald_closed_from(c: &CurvatureInputs) -> BerwaldTensor {
    let dim = c.x.len() + 1;
    let mut t = BerwaldTensor::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            for cc in 0..dim {
                for d in 0..dim {
                    let (_, spatial) = split_zero(&[b, cc, d]);
                    let v = if a == 0 { b0_component(c, &spatial) } else { bi_component(c, a, &spatial) };
                    t.set(a, b, cc, d, v);
                }
            }
        }
    }
    t
}

pub fn berwald_closed(spec: &MetricSpec, p: &SamplePoint) -> Result<BerwaldTensor> {
    Ok(berwald_closed_from(&CurvatureInputs::new(spec, p)?))
}

/// `B^A_{BCD} = ∂³G^A/∂y^B∂y^C∂y^D` from the raw-coordinate spray.
pub fn berwald_oracle(spec: &MetricSpec, p: &SamplePoint) -> Result<BerwaldTensor> {
    let n = p.n();
    let dim = n + 1;
    let g = oracle_spray_jets(spec, p, 5)?;
    let mut t = BerwaldTensor::zeros(dim);
    let nv = 2 * dim;
    for (a, ga) in g.iter().enumerate() {
        for b in 0..dim {
            for c in 0..dim {
                for d in 0..dim {
                    let mut idx = vec![0u8; nv];
                    for v in [b, c, d] {
                        idx[dim + v] += 1;
                    }
                    t.set(a, b, c, d, ga.partial(&idx)?);
                }
            }
        }
    }
    Ok(t)
}

/// `L̄_{ABC}`; the Landsberg tensor is `½ φ L̄`.
fn lbar_component(c: &CurvatureInputs, spatial: &[usize]) -> f64 {
    let (nb, ub, wb) = (&c.n, &c.u_, &c.w);
    let (s, z, r) = (c.s, c.z, c.r);
    let om = c.omega;
    let fs = c.phi_s;
    let a = c.phi_z;
    let b = r * r * fs + s * om;
    let cc = s * fs + om;
    let x = |i| c.xs(i);
    let u = |i| c.us(i);
    let d = delta;
    match *spatial {
        [] => a * nb.zzz + b * ub.zzz + cc * wb.zzz,
        [l] => {
            (a * nb.szz + b * ub.szz + cc * wb.szz + fs * wb.zz) * x(l)
                + (a * nb.psi_zz + b * ub.psi_zz + cc * wb.psi_zz - s * fs * wb.zz) * u(l)
        }
        [k, l] => {
            (a * nb.ssz + b * ub.ssz + cc * wb.ssz + 2.0 * fs * wb.sz) * x(k) * x(l)
                + (a * nb.zpsi_z + b * ub.zpsi_z + cc * wb.psi_z) * d(k, l)
                + (a / z * nb.q_z + b / z * ub.q_z + cc / (z * z) * wb.e_z + 2.0 * om * wb.psi_z) * u(k) * u(l)
                + (a * nb.psi_sz + b * ub.psi_sz + cc * wb.psi_sz + fs * wb.psi_z - s * fs * wb.sz)
                    * cyclic2(k, l, |k, l| x(k) * u(l))
        }
        [j, k, l] => {
            let g_xxx = (a * nb.sss + b * ub.sss + cc * wb.sss) / 3.0 + fs * wb.ss;
            let g_uxx = a * nb.psi_ss + b * ub.psi_ss + cc * wb.psi_ss + 2.0 * fs * wb.psi_s - s * fs * wb.ss;
            let g_uuu = a / (3.0 * z * z) * nb.c3
                + b / (3.0 * z * z) * ub.c3
                + cc / (3.0 * z * z * z) * wb.w3
                + om / z * wb.q_0;
            let g_dx = a * nb.zpsi_s + b * ub.zpsi_s + cc * wb.psi_s + fs * wb.zpsi_0;
            let g_uux = a / z * nb.q_s + b / z * ub.q_s + cc / (z * z) * wb.e_s + fs / z * wb.q_0 + 2.0 * om * wb.psi_s;
            let g_du = a * nb.b2 + b * ub.b2 + cc / z * wb.q_0 + om * wb.zpsi_0;
            cyclic3(j, k, l, |j, k, l| {
                g_xxx * x(j) * x(k) * x(l)
                    + g_uxx * u(j) * x(k) * x(l)
                    + g_uuu * u(j) * u(k) * u(l)
                    + g_dx * d(j, k) * x(l)
                    + g_uux * u(j) * u(k) * x(l)
                    + g_du * d(j, k) * u(l)
            })
        }
        _ => unreachable!(),
    }
}

pub fn landsberg_closed_from(c: &CurvatureInputs) -> LandsbergTensor {
    let dim = c.x.len() + 1;
    let mut t = LandsbergTensor::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            for cc in 0..dim {
                let (_, spatial) = split_zero(&[a, b, cc]);
                t.set(a, b, cc, 0.5 * c.phi * lbar_component(c, &spatial));
            }
        }
    }
    t
}

pub fn landsberg_closed(spec: &MetricSpec, p: &SamplePoint) -> Result<LandsbergTensor> {
    Ok(landsberg_closed_from(&CurvatureInputs::new(spec, p)?))
}

/// `L_{ABC} = ½ F F_{y^D} B^D_{ABC}` with `F`, `F_y` from the raw coordinates.
pub fn landsberg_oracle(spec: &MetricSpec, p: &SamplePoint) -> Result<LandsbergTensor> {
    let b = berwald_oracle(spec, p)?;
    let (f, fy) = f_and_fy(spec, p)?;
    Ok(contract_landsberg(&b, f, &fy))
}

pub(crate) fn contract_landsberg(b: &BerwaldTensor, f: f64, fy: &[f64]) -> LandsbergTensor {
    let dim = b.dim;
    let mut t = LandsbergTensor::zeros(dim);
    for a in 0..dim {
        for bb in 0..dim {
            for c in 0..dim {
                let s: f64 = (0..dim).map(|d| fy[d] * b.get(d, a, bb, c)).sum();
                t.set(a, bb, c, 0.5 * f * s);
            }
        }
    }
    t
}

/// `F` and `∂F/∂y^A` at a point.
pub fn f_and_fy(spec: &MetricSpec, p: &SamplePoint) -> Result<(f64, Vec<f64>)> {
    let dim = p.n() + 1;
    let (f, _) = raw_f_jet(spec, p, 1)?;
    let mut fy = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut idx = vec![0u8; 2 * dim];
        idx[dim + a] = 1;
        fy.push(f.partial(&idx)?);
    }
    Ok((f.value(), fy))
}

/// `max_A |F_{y^A} − (φ_z, φ_s xⁱ + Ω uᵢ)_A|`
pub fn fy_identity_residual(spec: &MetricSpec, p: &SamplePoint) -> Result<f64> {
    let c = CurvatureInputs::new(spec, p)?;
    let (_, fy) = f_and_fy(spec, p)?;
    let mut worst = (fy[0] - c.phi_z).abs();
    for i in 1..fy.len() {
        worst = worst.max((fy[i] - (c.phi_s * c.xs(i) + c.omega * c.us(i))).abs());
    }
    Ok(worst)
}

/// Closed form next to oracle at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureComparison {
    pub berwald_max_abs: f64,
    pub berwald_diff: f64,
    pub berwald_symmetry_defect: f64,
    pub berwald_y_contraction: f64,
    pub landsberg_max_abs: f64,
    pub landsberg_diff: f64,
    pub landsberg_symmetry_defect: f64,
    pub landsberg_y_contraction: f64,
}

pub fn compare_curvature(spec: &MetricSpec, p: &SamplePoint) -> Result<CurvatureComparison> {
    let c = CurvatureInputs::new(spec, p)?;
    let b = berwald_closed_from(&c);
    let l = landsberg_closed_from(&c);
    let bo = berwald_oracle(spec, p)?;
    let (f, fy) = f_and_fy(spec, p)?;
    let lo = contract_landsberg(&bo, f, &fy);
    let y = p.y();
    Ok(CurvatureComparison {
        berwald_max_abs: bo.max_abs(),
        berwald_diff: b.max_diff(&bo),
        berwald_symmetry_defect: b.symmetry_defect(),
        berwald_y_contraction: b.y_contraction(&y),
        landsberg_max_abs: lo.max_abs(),
        landsberg_diff: l.max_diff(&lo),
        landsberg_symmetry_defect: l.symmetry_defect(),
        landsberg_y_contraction: l.y_contraction(&y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{Family, ParameterEnv};

    fn check(spec: &MetricSpec, p: &SamplePoint) -> CurvatureComparison {
        let c = compare_curvature(spec, p).unwrap();
        eprintln!("{} {c:?}", spec.name);
        c
    }

    fn specs() -> Vec<MetricSpec> {
        vec![
            MetricSpec::builtin(Family::Randers { c: 0.5 }, 3).unwrap(),
            MetricSpec::builtin(Family::Unicorn { k: 1.0, alpha: 1.0, beta: 1.0 }, 3).unwrap(),
            MetricSpec::parse("mix", 3, "sqrt(z^2+r^2+s^2)*exp(0.3*x0*s)+0.2*z", ParameterEnv::new()).unwrap(),
            MetricSpec::parse("x0dep", 3, "sqrt(exp(2*x0)*z^2+z+1+s^2)", ParameterEnv::new()).unwrap(),
        ]
    }

    #[test]
    fn closed_forms_match_oracle() {
        let pts = [
            SamplePoint::canonical(3, 0.3, 0.7, 0.2, 0.9, 1.0),
            SamplePoint::new(-0.2, vec![0.3, -0.5, 0.4], 1.3, vec![0.7, 0.2, -0.6]).unwrap(),
        ];
        for spec in specs() {
            for p in &pts {
                let c = check(&spec, p);
                assert!(agree(c.berwald_diff, c.berwald_max_abs), "berwald {}: {c:?}", spec.name);
                assert!(agree(c.landsberg_diff, c.landsberg_max_abs), "landsberg {}: {c:?}", spec.name);
                assert!(c.berwald_symmetry_defect < 1e-9);
                assert!(c.landsberg_symmetry_defect < 1e-9);
            }
        }
    }

    fn agree(d: f64, scale: f64) -> bool {
        crate::spray::agree(d, scale, 1e-6)
    }

    #[test]
    fn euclidean_is_flat() {
        let spec = MetricSpec::builtin(Family::Euclidean, 2).unwrap();
        let p = SamplePoint::canonical(2, 0.1, 0.5, 0.1, 0.4, 1.2);
        assert!(berwald_closed(&spec, &p).unwrap().max_abs() < 1e-10);
        assert!(landsberg_closed(&spec, &p).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn fy_identity() {
        for spec in specs() {
            let p = SamplePoint::new(0.4, vec![0.3, 0.5, -0.1], 0.8, vec![-0.2, 0.9, 0.3]).unwrap();
            assert!(fy_identity_residual(&spec, &p).unwrap() < 1e-12);
        }
    }
}
