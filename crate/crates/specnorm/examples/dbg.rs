use specnorm::norms::{recover_spectrum, NormSubject};
use specnorm::graph::{complete_bipartite, cycle_graph, complete_graph, Graph};

fn main() {
    for (name, g) in [
        ("K4", complete_graph(4)),
        ("C5", cycle_graph(5)),
        ("K33", complete_bipartite(3, 3)),
        ("hard6", Graph::from_mask(6, 21884).unwrap()),
        ("tiny6", Graph::from_mask(6, 25807).unwrap()),
    ] {
        let s = NormSubject::from_graph(g.clone());
        match recover_spectrum(|x| s.schatten(x).unwrap(), 60.0, 1e-3) {
            Ok(got) => {
                let want = specnorm::spectra::graph_singular_values(&g);
                let want = want.nonzero_groups();
                let ok = got.len() == want.len() && got.iter().zip(&want).all(|(a, b)|
                    (a.value - b.value).abs() <= 1e-3 && a.multiplicity == b.multiplicity);
                println!("{name}: {} got {:?}", if ok {"OK "} else {"BAD"},
                    got.iter().map(|x| (x.value, x.multiplicity)).collect::<Vec<_>>());
                if !ok {
                    println!("    want {:?}", want.iter().map(|x| (x.value, x.multiplicity)).collect::<Vec<_>>());
                }
            }
            Err(e) => println!("{name}: ERR {e}"),
        }
    }
}
