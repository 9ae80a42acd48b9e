//! JSON wire formats for loops, moment values, Grassmannian points and
//! witness graphs. The on-disk schemas are f64; conversion to the
//! generic scalar happens at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::ConnectivityReport;
use crate::fourier::MatrixSeries;
use crate::grassmann::{GrassPoint, WeightTable};
use crate::liegroup::{LatticeVector, TorusVector};
use crate::linalg::CMatrix;
use crate::loops::AlgebraicLoop;
use crate::moment::MomentValue;
use crate::scalar::Real;

/// One Fourier coefficient: frequency plus row-major real and imaginary
/// parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffJson {
    pub k: i64,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Loop schema: {"group":"SU","N":…,"order":…,"coeffs":[…]}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopJson {
    pub group: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub order: usize,
    pub coeffs: Vec<CoeffJson>,
}

impl LoopJson {
    pub fn from_loop<T: Real>(lp: &AlgebraicLoop<T>) -> Self {
        Self::from_series(lp.series())
    }

    pub fn from_series<T: Real>(series: &MatrixSeries<T>) -> Self {
        let n = series.dim();
        let coeffs = series
            .frequencies()
            .map(|k| {
                let c = series.coeff(k);
                let mut re = vec![vec![0.0; n]; n];
                let mut im = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        re[i][j] = c[(i, j)].re.to_double();
                        im[i][j] = c[(i, j)].im.to_double();
                    }
                }
                CoeffJson { k, re, im }
            })
            .collect();
        Self {
            group: "SU".to_string(),
            n,
            order: series.order(),
            coeffs,
        }
    }

    pub fn to_series<T: Real>(&self) -> Result<MatrixSeries<T>> {
        if self.group != "SU" {
            return Err(Error::InvalidLoop(format!(
                "unsupported group {:?}",
                self.group
            )));
        }
        let mut series = MatrixSeries::<T>::zero(self.n, self.order);
        for c in &self.coeffs {
            if c.k.unsigned_abs() as usize > self.order {
                return Err(Error::InvalidLoop(format!(
                    "coefficient frequency {} outside order {}",
                    c.k, self.order
                )));
            }
            if c.re.len() != self.n || c.im.len() != self.n {
                return Err(Error::InvalidLoop("coefficient shape mismatch".into()));
            }
            let mut m = CMatrix::<T>::zeros(self.n, self.n);
            for i in 0..self.n {
                if c.re[i].len() != self.n || c.im[i].len() != self.n {
                    return Err(Error::InvalidLoop("coefficient shape mismatch".into()));
                }
                for j in 0..self.n {
                    m[(i, j)] = num_complex::Complex::new(T::of(c.re[i][j]), T::of(c.im[i][j]));
                }
            }
            *series.coeff_mut(c.k) = m;
        }
        Ok(series)
    }

    /// Parse and validate as a based group-valued loop.
    pub fn to_loop<T: Real>(&self) -> Result<AlgebraicLoop<T>> {
        AlgebraicLoop::new(self.to_series()?)
    }
}

/// Torus vector schema: {"N":…,"coords":[first N−1 coordinates]}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coords: Vec<f64>,
}

impl TorusJson {
    pub fn from_torus<T: Real>(v: &TorusVector<T>) -> Self {
        Self {
            n: v.dim(),
            coords: v.chart().iter().map(|c| c.to_double()).collect(),
        }
    }

    pub fn to_torus<T: Real>(&self) -> Result<TorusVector<T>> {
        let chart: Vec<T> = self.coords.iter().map(|&c| T::of(c)).collect();
        TorusVector::from_chart(self.n, &chart)
    }
}

/// Lattice vector schema, integer chart coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coords: Vec<i64>,
}

impl LatticeJson {
    pub fn from_lattice(v: &LatticeVector) -> Self {
        Self {
            n: v.dim(),
            coords: v.coords()[..v.dim() - 1].to_vec(),
        }
    }

    pub fn to_lattice(&self) -> Result<LatticeVector> {
        LatticeVector::from_chart(self.n, &self.coords)
    }
}

/// Moment value schema: {"p":[chart coords],"E":…}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentJson {
    pub p: Vec<f64>,
    #[serde(rename = "E")]
    pub energy: f64,
}

impl MomentJson {
    pub fn from_moment<T: Real>(mu: &MomentValue<T>) -> Self {
        Self {
            p: mu.p.chart().iter().map(|c| c.to_double()).collect(),
            energy: mu.energy.to_double(),
        }
    }

    pub fn to_moment<T: Real>(&self) -> Result<MomentValue<T>> {
        let chart: Vec<T> = self.p.iter().map(|&c| T::of(c)).collect();
        Ok(MomentValue::new(
            TorusVector::from_chart(self.p.len() + 1, &chart)?,
            T::of(self.energy),
        ))
    }
}

/// Row legend entry of the Grassmannian basis: ambient index (k, j),
/// with j 1-based as a character label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowLegendJson {
    pub k: i64,
    pub j: usize,
}

/// Grassmannian point schema: the canonical basis row-major plus the
/// (k, j) row legend.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrassPointJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub order: usize,
    pub rows: Vec<RowLegendJson>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl GrassPointJson {
    pub fn from_point<T: Real>(p: &GrassPoint<T>) -> Self {
        let w = WeightTable::new(p.n_dim(), p.order());
        let rows = (0..p.ambient())
            .map(|r| {
                let (k, j) = w.index(r);
                RowLegendJson { k, j: j + 1 }
            })
            .collect();
        let b = p.basis();
        let re = (0..b.nrows())
            .map(|r| (0..b.ncols()).map(|c| b[(r, c)].re.to_double()).collect())
            .collect();
        let im = (0..b.nrows())
            .map(|r| (0..b.ncols()).map(|c| b[(r, c)].im.to_double()).collect())
            .collect();
        Self {
            n: p.n_dim(),
            order: p.order(),
            rows,
            re,
            im,
        }
    }

    pub fn to_point<T: Real>(&self) -> Result<GrassPoint<T>> {
        let rows = 2 * self.order * self.n;
        let plane = self.order * self.n;
        if self.re.len() != rows || self.im.len() != rows {
            return Err(Error::InvalidArgument("basis shape mismatch".into()));
        }
        let mut m = CMatrix::<T>::zeros(rows, plane);
        for r in 0..rows {
            if self.re[r].len() != plane || self.im[r].len() != plane {
                return Err(Error::InvalidArgument("basis shape mismatch".into()));
            }
            for c in 0..plane {
                m[(r, c)] = num_complex::Complex::new(T::of(self.re[r][c]), T::of(self.im[r][c]));
            }
        }
        GrassPoint::from_spanning(self.n, self.order, &m)
    }
}

/// Witness graph schema emitted by the connectivity probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessGraphJson {
    pub components: usize,
    pub nodes: Vec<MomentJson>,
    pub edges: Vec<[usize; 2]>,
    pub failed_edges: Vec<[usize; 2]>,
    pub sample_failures: usize,
    pub empty: bool,
}

impl WitnessGraphJson {
    pub fn from_report<T: Real>(r: &ConnectivityReport<T>) -> Self {
        Self {
            components: r.components,
            nodes: r.nodes.iter().map(MomentJson::from_moment).collect(),
            edges: r.edges.iter().map(|&(a, b)| [a, b]).collect(),
            failed_edges: r.failed_edges.iter().map(|&(a, b)| [a, b]).collect(),
            sample_failures: r.sample_failures,
            empty: r.empty,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::random_loop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn loop_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(307);
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let json = LoopJson::from_loop(&lp);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"group\":\"SU\""));
        assert!(text.contains("\"N\":2"));
        let back: LoopJson = serde_json::from_str(&text).unwrap();
        let lp2 = back.to_loop::<f64>().unwrap();
        assert!(lp.h1_distance_sq(&lp2).sqrt() < 1e-12);
    }

    #[test]
    fn loop_json_rejects_bad_frequency() {
        let mut json = LoopJson::from_loop(&AlgebraicLoop::<f64>::constant(2));
        json.coeffs.push(CoeffJson {
            k: 5,
            re: vec![vec![0.0; 2]; 2],
            im: vec![vec![0.0; 2]; 2],
        });
        assert!(json.to_loop::<f64>().is_err());
    }

    #[test]
    fn moment_and_torus_roundtrip() {
        let mu = MomentValue::new(TorusVector::from_chart(3, &[0.25, -1.5]).unwrap(), 2.75);
        let json = MomentJson::from_moment(&mu);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"E\":2.75"));
        let back: MomentJson = serde_json::from_str(&text).unwrap();
        let mu2 = back.to_moment::<f64>().unwrap();
        assert!(mu.distance(&mu2) < 1e-15);
    }

    #[test]
    fn grass_point_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(311);
        let model = crate::grassmann::GrassModel::<f64>::new(2, 2).unwrap();
        let lp = random_loop::<f64, _>(2, 2, 0.6, &mut rng).unwrap();
        let p = model.embed(&lp).unwrap();
        let json = GrassPointJson::from_point(&p);
        let back = json.to_point::<f64>().unwrap();
        assert!(p.distance(&back) < 1e-12);
    }
}
