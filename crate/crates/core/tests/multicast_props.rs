use csnet::multicast::{
    brute_force_min_cut, coding_rank, max_flow, receiver_decode, rlnc_session, Edge,
    GaloisField, NetworkGraph,
};
use proptest::prelude::*;

fn dag_strategy() -> impl Strategy<Value = NetworkGraph> {
    (3usize..=7)
        .prop_flat_map(|nodes| {
            let pairs: Vec<(usize, usize)> = (0..nodes)
                .flat_map(|i| (i + 1..nodes).map(move |j| (i, j)))
                .collect();
            let len = pairs.len();
            (
                Just(nodes),
                Just(pairs),
                proptest::collection::vec((any::<bool>(), 1u32..=4), len),
            )
        })
        .prop_map(|(nodes, pairs, picks)| {
            let edges: Vec<Edge> = pairs
                .iter()
                .zip(picks)
                .filter(|(_, (keep, _))| *keep)
                .take(12)
                .map(|(&(from, to), (_, capacity))| Edge { from, to, capacity })
                .collect();
            NetworkGraph::new(nodes, edges, vec![0, 1], vec![nodes - 1]).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn max_flow_equals_min_cut(g in dag_strategy()) {
        let t = g.num_nodes() - 1;
        let f = max_flow(&g, &[0, 1], t).unwrap();
        prop_assert_eq!(f.value, brute_force_min_cut(&g, &[0, 1], t).unwrap());
        prop_assert!(f.violations(&g, &[0, 1], t).is_empty());
    }

    #[test]
    fn rlnc_is_linear_in_payload(seed in any::<u64>(), a in any::<u8>(), b in any::<u8>()) {
        let g = NetworkGraph::butterfly();
        let field = GaloisField::new(8).unwrap();
        let x = vec![vec![a, 3], vec![b, 7]];
        let y = vec![vec![b, 1], vec![5, a]];
        let sum: Vec<Vec<u8>> = x
            .iter()
            .zip(&y)
            .map(|(p, q)| p.iter().zip(q).map(|(u, v)| field.add(*u, *v)).collect())
            .collect();
        let sx = rlnc_session(&g, &x, &field, seed).unwrap();
        let sy = rlnc_session(&g, &y, &field, seed).unwrap();
        let ss = rlnc_session(&g, &sum, &field, seed).unwrap();
        for r in 0..2 {
            for ((px, py), ps) in sx.received[r].iter().zip(&sy.received[r]).zip(&ss.received[r]) {
                prop_assert_eq!(&px.coding_vector, &ps.coding_vector);
                let added: Vec<u8> = px.payload.iter().zip(&py.payload).map(|(u, v)| field.add(*u, *v)).collect();
                prop_assert_eq!(&added, &ps.payload);
            }
        }
    }

    #[test]
    fn full_rank_receivers_decode(seed in any::<u64>(), p in proptest::collection::vec(any::<u8>(), 6)) {
        let g = NetworkGraph::butterfly();
        let field = GaloisField::new(8).unwrap();
        let packets = vec![p[..3].to_vec(), p[3..].to_vec()];
        let s = rlnc_session(&g, &packets, &field, seed).unwrap();
        for r in 0..2 {
            if coding_rank(&s.received[r], 2, &field) == 2 {
                prop_assert_eq!(receiver_decode(&s.received[r], 2, &field).unwrap(), packets.clone());
            }
        }
    }
}
