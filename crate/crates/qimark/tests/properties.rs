//! Randomized invariants over the codec, the matching solver, and the
//! packing layers.

use proptest::prelude::*;

use qimark::codebook::{brute_force_matching, max_weight_matching, AdjacencyMatrix, Permutation};
use qimark::lattice::{CosetTable, LatticeKind, LatticeSpec};
use qimark::message::{bits_from_messages, messages_from_bits};
use qimark::plane::ImagePlane;
use qimark::qim::{detect, embed, Scheme, SchemeKind};

fn a2_fixture() -> (LatticeSpec<f64>, CosetTable<f64>) {
    let spec = LatticeSpec::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
    let table = CosetTable::build(&spec).unwrap();
    (spec, table)
}

proptest! {
    #[test]
    fn embed_detect_round_trip(
        sx in -40.0f64..40.0,
        sy in -40.0f64..40.0,
        msg_index in 0usize..4,
        scheme_pick in 0usize..4,
        rotate in 1usize..4,
    ) {
        let (spec, table) = a2_fixture();
        let mut g: Vec<usize> = (0..table.len()).collect();
        g.rotate_left(rotate);
        let gamma = Permutation::new(g).unwrap();
        let kind = SchemeKind::all()[scheme_pick];
        let scheme = Scheme::new(kind);
        let m = table.message_of(msg_index);
        let y = embed(&spec, &table, &scheme, Some(&gamma), &[sx, sy], &m).unwrap();
        let got = detect(
            &spec,
            &table,
            if kind.uses_key() { Some(&gamma) } else { None },
            &y,
        )
        .unwrap();
        prop_assert_eq!(got, m);
    }

    #[test]
    fn matching_weight_equals_brute_force(
        entries in proptest::collection::vec(0u64..30, 25),
    ) {
        let rows: Vec<Vec<u64>> = entries.chunks(5).map(|c| c.to_vec()).collect();
        let w = AdjacencyMatrix::from_rows(&rows).unwrap();
        let fast = max_weight_matching(&w);
        let slow = brute_force_matching(&w).unwrap();
        prop_assert_eq!(fast.total_weight, slow.total_weight);
        prop_assert_eq!(fast.gamma, slow.gamma);
    }

    #[test]
    fn bits_round_trip_through_messages(
        bits in proptest::collection::vec(0u8..2, 48),
    ) {
        // alpha=4, dim=2: 4 bits per message
        let msgs = messages_from_bits(&bits, 4, 2, 12).unwrap();
        prop_assert_eq!(bits_from_messages(&msgs, 4).unwrap(), bits);
    }

    #[test]
    fn pgm_round_trip(
        pixels in proptest::collection::vec(any::<u8>(), 128),
    ) {
        let plane = ImagePlane::new(16, 8, pixels).unwrap();
        let back = ImagePlane::from_pgm_bytes(&plane.to_pgm_bytes()).unwrap();
        prop_assert_eq!(back, plane);
    }

    #[test]
    fn adjacency_merge_matches_concatenation(
        a in proptest::collection::vec((0usize..4, 0usize..4), 0..40),
        b in proptest::collection::vec((0usize..4, 0usize..4), 0..40),
    ) {
        let wa = AdjacencyMatrix::from_index_pairs(4, &a).unwrap();
        let wb = AdjacencyMatrix::from_index_pairs(4, &b).unwrap();
        let concat: Vec<_> = a.iter().chain(&b).copied().collect();
        let direct = AdjacencyMatrix::from_index_pairs(4, &concat).unwrap();
        prop_assert_eq!(wa.merged(&wb).unwrap(), direct);
    }
}
