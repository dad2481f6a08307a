use super::dataset::Features;

/// `exp(−γ‖x − z‖²)`.
pub fn rbf_kernel(x: &Features, z: &Features, gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Dense row-major kernel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(xs: &[Features], gamma: f64) -> Self {
        let n = xs.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf_kernel(&xs[i], &xs[j], gamma);
                data[i * n + j] = k;
                data[j * n + i] = k;
            }
        }
        Gram { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Principal submatrix on `indices`, in that order.
    pub fn restrict(&self, indices: &[usize]) -> Gram {
        let n = indices.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in indices {
            let row = self.row(i);
            data.extend(indices.iter().map(|&j| row[j]));
        }
        Gram { n, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn closed_forms() {
        let x = [0.3; 9];
        assert_eq!(rbf_kernel(&x, &x, 2.0), 1.0);
        let mut z = [0.0; 9];
        z[4] = 1.0;
        assert!((rbf_kernel(&[0.0; 9], &z, 1.0) - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn gram_is_psd() {
        let mut rng = crate::rng::rng_from_seed(4);
        let xs: Vec<Features> = (0..50)
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
            .collect();
        let g = Gram::new(&xs, 0.7);
        let m = DMatrix::from_fn(50, 50, |i, j| g.get(i, j));
        assert!(m.symmetric_eigenvalues().min() >= -1e-10);
        assert!((0..50).all(|i| (0..50).all(|j| g.get(i, j) > 0.0 && g.get(i, j) <= 1.0)));
    }

    #[test]
    fn restrict_picks_entries() {
        let xs: Vec<Features> = (0..4).map(|k| [k as f64 * 0.1; 9]).collect();
        let g = Gram::new(&xs, 1.0);
        let r = g.restrict(&[3, 1]);
        assert_eq!(r.get(0, 1), g.get(3, 1));
        assert_eq!(r.get(1, 1), 1.0);
    }
}
