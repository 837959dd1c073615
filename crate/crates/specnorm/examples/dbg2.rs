use specnorm::norms::{recover_spectrum, NormSubject};
use specnorm::graph::Graph;
fn main() {
    for (name, mask) in [("hard6", 21884u64), ("tiny6", 25807u64)] {
        let g = Graph::from_mask(6, mask).unwrap();
        let s = NormSubject::from_graph(g.clone());
        let want = specnorm::spectra::graph_singular_values(&g);
        println!("=== {name} want {:?}", want.nonzero_groups().iter().map(|x| (x.value, x.multiplicity)).collect::<Vec<_>>());
        let r = recover_spectrum(|x| s.schatten(x).unwrap(), 60.0, 1e-3);
        match r {
            Ok(got) => println!("{name} got {:?}", got.iter().map(|x| (x.value, x.multiplicity)).collect::<Vec<_>>()),
            Err(e) => println!("{name} ERR {e}"),
        }
    }
}
