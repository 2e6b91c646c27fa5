//! Adaptive Gauss–Kronrod (10/21 point) integration.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Tolerance pair for [`integrate`]: an interval is accepted once its error
/// estimate is below `max(abs, rel * |estimate|)` for every component.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-8, rel: 1e-11, max_intervals: 400 }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, ..Default::default() }
    }
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn kronrod<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Piece<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut samples = [[0.0; N]; 21];
    samples[20] = fc;
    for k in 0..N {
        kron[k] = WGK[10] * fc[k];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        for k in 0..N {
            kron[k] += WGK[j] * (f1[k] + f2[k]);
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        let mean = 0.5 * kron[k];
        let mut resasc = WGK[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((samples[2 * j][k] - mean).abs() + (samples[2 * j + 1][k] - mean).abs());
        }
        resasc *= half.abs();
        value[k] = kron[k] * half;
        let diff = ((kron[k] - gauss[k]) * half).abs();
        error[k] = if resasc != 0.0 && diff != 0.0 {
            resasc * (200.0 * diff / resasc).powf(1.5).min(1.0)
        } else {
            diff
        };
        error[k] = error[k].max(10.0 * f64::EPSILON * value[k].abs());
    }
    Piece { a, b, value, error }
}

/// Integrates a vector-valued function over `[a, b]`, first splitting at the
/// given interior break points (points outside the interval are ignored).
pub fn integrate<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<[f64; N]>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(b > a) {
        return Ok([0.0; N]);
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut pieces = Vec::with_capacity(cuts.len() + 1);
    let mut left = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        if c > left {
            pieces.push(kronrod(&mut f, left, c));
        }
        left = c;
    }

    loop {
        let mut total = [0.0; N];
        let mut err = [0.0; N];
        for p in &pieces {
            for k in 0..N {
                total[k] += p.value[k];
                err[k] += p.error[k];
            }
        }
        let ok = (0..N).all(|k| err[k] <= tol.abs.max(tol.rel * total[k].abs()));
        if ok {
            return Ok(total);
        }
        if pieces.len() >= tol.max_intervals {
            let worst = (0..N).map(|k| err[k]).fold(0.0, f64::max);
            return Err(Error::Quadrature { requested: tol.abs, achieved: worst });
        }
        // split the interval with the largest error relative to the budget
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let w = (0..N)
                    .map(|k| p.error[k] / tol.abs.max(tol.rel * total[k].abs()))
                    .fold(0.0, f64::max);
                (i, w)
            })
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let piece = pieces.swap_remove(idx);
        let mid = 0.5 * (piece.a + piece.b);
        if !(mid > piece.a && mid < piece.b) {
            let worst = (0..N).map(|k| err[k]).fold(0.0, f64::max);
            return Err(Error::Quadrature { requested: tol.abs, achieved: worst });
        }
        pieces.push(kronrod(&mut f, piece.a, mid));
        pieces.push(kronrod(&mut f, mid, piece.b));
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| [f(x)], a, b, breaks, tol).map(|v| v[0])
}
