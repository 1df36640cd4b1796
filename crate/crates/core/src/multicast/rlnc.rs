//! Random linear network coding over a DAG and Gaussian-elimination decoding.

use serde::{Deserialize, Serialize};

use super::gf::{FieldElement, GaloisField};
use super::graph::{min_cut, NetworkGraph};
use crate::error::{invalid, Error, Result};
use crate::rng::rng_for;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedPacket {
    pub payload: Vec<FieldElement>,
    /// Global coefficients with respect to the injected source packets.
    pub coding_vector: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlncSession {
    /// Packets collected by each receiver, in `g.receivers()` order.
    pub received: Vec<Vec<CodedPacket>>,
    pub min_cuts: Vec<u64>,
    /// Receivers whose min-cut is below the number of source packets; they
    /// cannot decode.
    pub insufficient_cut: Vec<bool>,
}

/// Pushes `packets[i]` in at `g.sources()[i]` and runs one generation of
/// random linear network coding in topological order.
///
/// Every edge unit carries a fresh combination of the tail node's inputs
/// with coefficients uniform over the field. A node with a single input
/// relays it unchanged.
pub fn rlnc_session(
    g: &NetworkGraph,
    packets: &[Vec<FieldElement>],
    field: &GaloisField,
    seed: u64,
) -> Result<RlncSession> {
    let m = packets.len();
    if m != g.sources().len() {
        return Err(Error::DimensionMismatch {
            expected: g.sources().len(),
            got: m,
        });
    }
    let len = packets.first().map_or(0, Vec::len);
    if packets.iter().any(|p| p.len() != len) {
        return Err(invalid("packets", "payloads differ in length"));
    }
    if packets.iter().flatten().any(|&s| !field.contains(s)) {
        return Err(invalid("packets", format!("symbol outside GF(2^{})", field.q())));
    }

    let mut inbox: Vec<Vec<CodedPacket>> = vec![Vec::new(); g.num_nodes()];
    for (i, (&s, p)) in g.sources().iter().zip(packets).enumerate() {
        let mut cv = vec![0; m];
        cv[i] = 1;
        inbox[s].push(CodedPacket {
            payload: p.clone(),
            coding_vector: cv,
        });
    }
    let mut rng = rng_for(seed, "rlnc", 0);
    for &u in g.topological_order() {
        let inputs = std::mem::take(&mut inbox[u]);
        for e in g.edges().iter().filter(|e| e.from == u) {
            for _ in 0..e.capacity {
                let out = match inputs.len() {
                    0 => continue,
                    1 => inputs[0].clone(),
                    _ => {
                        let mut out = CodedPacket {
                            payload: vec![0; len],
                            coding_vector: vec![0; m],
                        };
                        for p in &inputs {
                            let c = field.random(&mut rng);
                            field.axpy(&mut out.payload, c, &p.payload);
                            field.axpy(&mut out.coding_vector, c, &p.coding_vector);
                        }
                        out
                    }
                };
                inbox[e.to].push(out);
            }
        }
        inbox[u] = inputs;
    }
    let sources = g.sources();
    let mut received = Vec::new();
    let mut min_cuts = Vec::new();
    for &r in g.receivers() {
        received.push(inbox[r].clone());
        min_cuts.push(min_cut(g, sources, r)?);
    }
    let insufficient_cut = min_cuts.iter().map(|&c| c < m as u64).collect();
    Ok(RlncSession {
        received,
        min_cuts,
        insufficient_cut,
    })
}

/// Row-reduces the coding vectors of `packets` and returns the `m` source
/// payloads. Fails with [`Error::RankDeficient`] when the rank is below `m`.
pub fn receiver_decode(
    packets: &[CodedPacket],
    m: usize,
    field: &GaloisField,
) -> Result<Vec<Vec<FieldElement>>> {
    if let Some(p) = packets.iter().find(|p| p.coding_vector.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: p.coding_vector.len(),
        });
    }
    let len = packets.first().map_or(0, |p| p.payload.len());
    if packets.iter().any(|p| p.payload.len() != len) {
        return Err(invalid("packets", "payloads differ in length"));
    }
    // augmented rows [coding vector | payload]
    let mut rows: Vec<Vec<FieldElement>> = packets
        .iter()
        .map(|p| p.coding_vector.iter().chain(&p.payload).copied().collect())
        .collect();
    let mut rank = 0;
    for col in 0..m {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]).expect("nonzero pivot");
        field.scale(&mut rows[rank], inv);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let c = row[col];
                field.axpy(row, c, &pivot_row);
            }
        }
        rank += 1;
    }
    if rank < m {
        return Err(Error::RankDeficient { rank, needed: m });
    }
    Ok(rows.into_iter().take(m).map(|r| r[m..].to_vec()).collect())
}

/// Rank of the coding-vector matrix.
pub fn coding_rank(packets: &[CodedPacket], m: usize, field: &GaloisField) -> usize {
    let stripped: Vec<CodedPacket> = packets
        .iter()
        .map(|p| CodedPacket {
            payload: Vec::new(),
            coding_vector: p.coding_vector.clone(),
        })
        .collect();
    match receiver_decode(&stripped, m, field) {
        Ok(_) => m,
        Err(Error::RankDeficient { rank, .. }) => rank,
        Err(_) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicast::graph::Edge;
    use rand::Rng;

    fn gf() -> GaloisField {
        GaloisField::new(8).unwrap()
    }

    #[test]
    fn depth_one_relays_identity() {
        let g = NetworkGraph::depth1(4).unwrap();
        let pk: Vec<Vec<u8>> = (0..4).map(|i| vec![i as u8 * 3, 7]).collect();
        let s = rlnc_session(&g, &pk, &gf(), 9).unwrap();
        let got = &s.received[0];
        assert_eq!(got.len(), 4);
        for (i, p) in got.iter().enumerate() {
            let mut e = vec![0; 4];
            e[i] = 1;
            assert_eq!(p.coding_vector, e);
            assert_eq!(p.payload, pk[i]);
        }
        assert_eq!(receiver_decode(got, 4, &gf()).unwrap(), pk);
    }

    #[test]
    fn duplicate_packet_is_rank_deficient() {
        let p = CodedPacket {
            payload: vec![5],
            coding_vector: vec![3, 9],
        };
        assert!(matches!(
            receiver_decode(&[p.clone(), p], 2, &gf()),
            Err(Error::RankDeficient { rank: 1, needed: 2 })
        ));
    }

    #[test]
    fn random_full_rank_system_roundtrips() {
        let f = gf();
        let mut rng = rng_for(4, "test", 0);
        let payloads: Vec<Vec<u8>> = (0..5)
            .map(|_| (0..6).map(|_| rng.random()).collect())
            .collect();
        let mut packets = Vec::new();
        while packets.len() < 5 {
            let cv: Vec<u8> = (0..5).map(|_| rng.random()).collect();
            let mut payload = vec![0u8; 6];
            for (c, p) in cv.iter().zip(&payloads) {
                f.axpy(&mut payload, *c, p);
            }
            packets.push(CodedPacket {
                payload,
                coding_vector: cv,
            });
            if coding_rank(&packets, 5, &f) < packets.len() {
                packets.pop();
            }
        }
        assert_eq!(receiver_decode(&packets, 5, &f).unwrap(), payloads);
    }

    #[test]
    fn payloads_follow_coding_vectors() {
        let f = GaloisField::new(4).unwrap();
        let g = NetworkGraph::butterfly();
        let pk = vec![vec![1, 2, 3], vec![15, 0, 9]];
        for seed in 0..50 {
            let s = rlnc_session(&g, &pk, &f, seed).unwrap();
            for p in s.received.iter().flatten() {
                for (j, sym) in p.payload.iter().enumerate() {
                    let col = [pk[0][j], pk[1][j]];
                    assert_eq!(*sym, f.dot(&p.coding_vector, &col));
                }
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let g = NetworkGraph::butterfly();
        let pk = vec![vec![10, 20], vec![30, 40]];
        let a = rlnc_session(&g, &pk, &gf(), 3).unwrap();
        let b = rlnc_session(&g, &pk, &gf(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn narrow_cut_is_flagged() {
        let g = NetworkGraph::new(
            4,
            vec![
                Edge { from: 0, to: 2, capacity: 1 },
                Edge { from: 1, to: 2, capacity: 1 },
                Edge { from: 2, to: 3, capacity: 1 },
            ],
            vec![0, 1],
            vec![3],
        )
        .unwrap();
        let s = rlnc_session(&g, &[vec![1], vec![2]], &gf(), 0).unwrap();
        assert_eq!(s.min_cuts, vec![1]);
        assert_eq!(s.insufficient_cut, vec![true]);
        assert!(receiver_decode(&s.received[0], 2, &gf()).is_err());
    }
}
