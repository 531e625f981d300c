use proptest::prelude::*;
use superflow::graph::{Dir, GridGraph, CAP_MAX};
use superflow::netproto::wire::{pack_bits, request_frame_len, unpack_bits};
use superflow::netproto::*;

fn request() -> impl Strategy<Value = WireRequest> {
    (1usize..=6, 1usize..=6, any::<u64>(), any::<u16>()).prop_flat_map(|(w, h, task_id, flags)| {
        let n = w * h;
        (
            prop::collection::vec(0..=CAP_MAX, n),
            prop::collection::vec(0..=CAP_MAX, n),
            prop::collection::vec(prop::array::uniform4(0..=CAP_MAX), n),
            prop::collection::vec((0u32..8, 0u32..8, any::<bool>()), 0..4),
        )
            .prop_map(move |(src, snk, nbr, segs)| {
                let mut graph = GridGraph::zeros(w, h);
                graph.src_cap = src;
                graph.snk_cap = snk;
                for (v, caps) in nbr.iter().enumerate() {
                    for dir in Dir::ALL {
                        if graph.neighbor(v, dir).is_some() {
                            graph.set_edge(v, dir, caps[dir.index()]);
                        }
                    }
                }
                let segments = segs
                    .into_iter()
                    .map(|(offset, width, swapped)| WireSegment {
                        offset: offset.min(w as u32 - 1),
                        width: width.min(w as u32 - offset.min(w as u32 - 1)),
                        swapped,
                    })
                    .collect();
                WireRequest {
                    task_id,
                    flags,
                    graph,
                    segments,
                }
            })
    })
}

proptest! {
    #[test]
    fn request_round_trip(req in request()) {
        let frame = encode_request(&req);
        prop_assert_eq!(frame.len(), request_frame_len(req.graph.width, req.graph.height, req.segments.len()));
        prop_assert_eq!(decode_request(&frame).unwrap(), req);
    }

    #[test]
    fn response_round_trip(task_id in any::<u64>(), flow in any::<u64>(), bits in prop::collection::vec(any::<bool>(), 0..100)) {
        let resp = WireResponse::ok(task_id, flow, &bits);
        prop_assert_eq!(decode_response(&encode_response(&resp)).unwrap(), resp.clone());
        prop_assert_eq!(unpack_bits(&resp.bitmap, bits.len()).unwrap(), bits);
    }

    #[test]
    fn truncation_is_detected(req in request(), cut in 1usize..64) {
        let frame = encode_request(&req);
        let short = &frame[..frame.len().saturating_sub(cut).max(1)];
        prop_assert!(decode_request(short).is_err());
    }

    #[test]
    fn packing_is_lsb_first(bits in prop::collection::vec(any::<bool>(), 1..40)) {
        let packed = pack_bits(&bits);
        prop_assert_eq!(packed[0] & 1 == 1, bits[0]);
    }
}
