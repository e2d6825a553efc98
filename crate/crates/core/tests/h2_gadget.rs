use chemgadget::gadget::gadgetize;
use chemgadget::graph::{EdgeClass, InteractionGraph, Role};
use chemgadget::pauli::parse_pauli_text;
use chemgadget::shaping::InteractionSet;

const ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

#[test]
fn two_rounds_give_22_qubits() {
    let h = parse_pauli_text(&std::fs::read_to_string(format!("{ROOT}/h2_bk.pauli")).unwrap()).unwrap();
    let allowed = InteractionSet::default();
    let g = gadgetize(&h, &[1e3, 1e4], &allowed, 3).unwrap();
    assert_eq!(g.rounds.len(), 2);
    assert_eq!(g.n_qubits(), 22);
    assert_eq!(g.rounds[0].n_after, 13);
    assert!(g.hamiltonian.iter().all(|(t, _)| allowed.realizes(t)));

    let graph = InteractionGraph::from_gadget(&g).unwrap();
    assert_eq!(graph.nodes.len(), 22);
    let tris = graph.ancilla_triangles();
    assert_eq!(tris.len(), 6, "{tris:?}");
    for t in &tris {
        let roles: Vec<Role> = t.iter().map(|&q| graph.nodes[q].role).collect();
        assert!(roles.iter().all(|r| *r == roles[0]));
    }
    let two_local = g.hamiltonian.iter().filter(|(t, _)| t.weight() == 2).count();
    assert_eq!(graph.edges.len(), two_local);
    println!(
        "ZZ {} XX {} XZ {}",
        graph.count(EdgeClass::ZZ),
        graph.count(EdgeClass::XX),
        graph.count(EdgeClass::XZ)
    );
}
