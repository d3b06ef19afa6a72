//! scratch
use pmco::linalg::*;
use pmco::ToleranceConfig;
use rand::Rng;

fn main() {
    let t = ToleranceConfig::default();
    let mut rng = pmco::rngkey::stream(78, pmco::rngkey::Domain::Sweep, 41, 0);
    for trial in 0..60 {
        let r = 1 + trial % 5;
        let c = 1 + (trial / 3) % 5;
        let a = Mat::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
        let rank = numerical_rank(&a, &t).unwrap();
        let kernel = null_space(&a, &t).unwrap();
        let mut worst: f64 = 0.0;
        for col in kernel.basis().column_iter() {
            let res = (&a * col.into_owned()).norm();
            if res > worst { worst = res; }
        }
        if worst > 1e-10 || rank + kernel.dim() != c {
            println!("trial {trial}: {r}x{c} rank {rank} kdim {} worst {:.3e}", kernel.dim(), worst);
            let ap = pinv(&a, &t).unwrap();
            println!("  penrose1 {:.3e}", (&a * &ap * &a - &a).norm());
            let proj = Mat::identity(c, c) - &ap * &a;
            let svd = proj.clone().svd(true, true);
            println!("  proj sv {:?}", svd.singular_values.as_slice());
        }
    }
    println!("done");
}
