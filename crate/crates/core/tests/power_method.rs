use nalgebra::DMatrix;
use wirtflow::prelude::*;

fn random_psd(n: usize, rng: &mut RandomSource) -> DMatrix<Complex64> {
    let cols: Vec<Complex64> = (0..n)
        .flat_map(|_| sample_complex_gaussian(n, rng).unwrap().into_inner())
        .collect();
    let b = DMatrix::from_column_slice(n, n, &cols);
    let w = sample_complex_gaussian(n, rng).unwrap().into_inner();
    let w = DMatrix::from_column_slice(n, 1, &w);
    // a rank-one bump keeps the leading eigenvalue well separated
    (&b * b.adjoint()).scale(1.0 / n as f64) + (&w * w.adjoint()).scale(0.5)
}

#[test]
fn agrees_with_dense_eigensolver() {
    let n = 32;
    for seed in 0..10 {
        let mut rng = RandomSource::new(seed, 0);
        let h = random_psd(n, &mut rng);
        let eig = h.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let (top, second) = (eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]);
        assert!(top - second >= 1.5, "seed {seed}: gap {}", top - second);
        let dense = eig.eigenvectors.column(order[0]).into_owned();

        let v = power_method(
            |v, out| {
                let r = &h * DMatrix::from_column_slice(n, 1, v);
                out.copy_from_slice(r.as_slice());
            },
            n,
            200,
            &mut rng,
        )
        .unwrap();
        let overlap = dense.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>();
        assert!(overlap.norm() >= 1.0 - 1e-8, "seed {seed}: alignment {}", overlap.norm());
    }
}
