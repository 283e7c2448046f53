//! Drives the exported C surface exactly as a foreign caller would: raw
//! pointers, NUL-terminated strings, explicit frees.

use std::ffi::{CStr, CString};
use std::ptr;

use ncclab_ffi::*;

const BUTTERFLY: &str = "\
network directed 6 7 2
e 0 2 1
e 1 2 1
e 2 3 1
e 3 4 1
e 3 5 1
e 1 4 1
e 0 5 1
p 0 4
p 1 5
";

fn last_error() -> String {
    unsafe { CStr::from_ptr(ncc_last_error_message()) }.to_str().unwrap().to_owned()
}

fn parse(text: &str) -> *mut NccNetwork {
    let c = CString::new(text).unwrap();
    let mut net: *mut NccNetwork = ptr::null_mut();
    let status = unsafe { ncc_network_parse(c.as_ptr(), &mut net) };
    assert_eq!(status, NccStatus::Ok, "{}", last_error());
    assert!(!net.is_null());
    net
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let owned = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { ncc_string_free(s) };
    owned
}

#[test]
fn version_is_a_static_semverish_string() {
    let v = unsafe { CStr::from_ptr(ncc_version()) }.to_str().unwrap();
    assert!(v.split('.').count() >= 2, "unexpected version {v}");
}

#[test]
fn network_handles_round_trip_through_the_file_format() {
    let net = parse(BUTTERFLY);
    let (mut v, mut e, mut p) = (0usize, 0usize, 0usize);
    assert_eq!(unsafe { ncc_network_counts(net, &mut v, &mut e, &mut p) }, NccStatus::Ok);
    assert_eq!((v, e, p), (6, 7, 2));
    assert!(unsafe { ncc_network_is_directed(net) });

    let mut rendered: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { ncc_network_render(net, &mut rendered) }, NccStatus::Ok);
    let text = take_string(rendered);
    let again = parse(&text);
    let mut e2 = 0usize;
    assert_eq!(
        unsafe { ncc_network_counts(again, ptr::null_mut(), &mut e2, ptr::null_mut()) },
        NccStatus::Ok,
    );
    assert_eq!(e2, 7);
    unsafe {
        ncc_network_free(again);
        ncc_network_free(net);
    }
}

#[test]
fn parse_failures_name_the_line_and_set_the_status() {
    let c = CString::new("network directed 2 1 1\ne 0 5 1\np 0 1\n").unwrap();
    let mut net: *mut NccNetwork = ptr::null_mut();
    let status = unsafe { ncc_network_parse(c.as_ptr(), &mut net) };
    assert_eq!(status, NccStatus::ParseError);
    assert!(net.is_null());
    assert!(last_error().contains("line"), "message was: {}", last_error());
}

#[test]
fn null_arguments_are_rejected_not_dereferenced() {
    let mut net: *mut NccNetwork = ptr::null_mut();
    assert_eq!(
        unsafe { ncc_network_parse(ptr::null(), &mut net) },
        NccStatus::NullArgument,
    );
    let c = CString::new(BUTTERFLY).unwrap();
    assert_eq!(
        unsafe { ncc_network_parse(c.as_ptr(), ptr::null_mut()) },
        NccStatus::NullArgument,
    );
    let mut sol: *mut NccFlowSolution = ptr::null_mut();
    assert_eq!(unsafe { ncc_flow_rate(ptr::null(), &mut sol) }, NccStatus::NullArgument);
    assert!(unsafe { ncc_flow_solution_rate(ptr::null()) }.is_nan());
    assert!(!unsafe { ncc_network_is_directed(ptr::null()) });
    unsafe {
        ncc_network_free(ptr::null_mut());
        ncc_flow_solution_free(ptr::null_mut());
        ncc_string_free(ptr::null_mut());
    }
}

#[test]
fn butterfly_flow_coding_and_undirected_match_the_known_rates() {
    let net = parse(BUTTERFLY);
    let mut sol: *mut NccFlowSolution = ptr::null_mut();
    assert_eq!(unsafe { ncc_flow_rate(net, &mut sol) }, NccStatus::Ok, "{}", last_error());
    assert!((unsafe { ncc_flow_solution_rate(sol) } - 0.5).abs() <= 1e-6);
    assert!(unsafe { ncc_flow_solution_max_violation(sol) } <= 1e-9);
    let mut csv: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { ncc_flow_solution_csv(sol, &mut csv) }, NccStatus::Ok);
    assert!(take_string(csv).starts_with("commodity,u,v,flow"));
    unsafe { ncc_flow_solution_free(sol) };

    let mut bits = 0u32;
    assert_eq!(unsafe { ncc_coding_search_best_bits(net, 1, &mut bits) }, NccStatus::Ok);
    assert_eq!(bits, 1);

    let mut un: *mut NccNetwork = ptr::null_mut();
    assert_eq!(unsafe { ncc_network_undirect(net, &mut un) }, NccStatus::Ok);
    assert!(!unsafe { ncc_network_is_directed(un) });
    let mut usol: *mut NccFlowSolution = ptr::null_mut();
    assert_eq!(unsafe { ncc_flow_rate(un, &mut usol) }, NccStatus::Ok);
    assert!(unsafe { ncc_flow_solution_rate(usol) } >= 1.0 - 1e-6);
    unsafe {
        ncc_flow_solution_free(usol);
        ncc_network_free(un);
        ncc_network_free(net);
    }
}

#[test]
fn gap_report_json_flags_the_directed_gap() {
    let net = parse(BUTTERFLY);
    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ncc_gap_report_json(net, 1, &mut json) },
        NccStatus::Ok,
        "{}",
        last_error(),
    );
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["best_rate_bits"], 1);
    assert_eq!(report["gap"]["directed_gap"], true);
    assert_eq!(report["gap"]["undirected_counterexample"], false);
    unsafe { ncc_network_free(net) };
}

#[test]
fn transform_round_trips_and_rejects_bad_moduli() {
    let input: Vec<u64> = (0..16).map(|i| (i * 7 + 3) % 17).collect();
    let mut fwd = [0u64; 16];
    assert_eq!(
        unsafe { ncc_ffft(17, input.as_ptr(), 16, false, fwd.as_mut_ptr()) },
        NccStatus::Ok,
    );
    let mut back = [0u64; 16];
    assert_eq!(
        unsafe { ncc_ffft(17, fwd.as_ptr(), 16, true, back.as_mut_ptr()) },
        NccStatus::Ok,
    );
    assert_eq!(back.to_vec(), input);

    let mut out = [0u64; 16];
    assert_eq!(
        unsafe { ncc_ffft(15, input.as_ptr(), 16, false, out.as_mut_ptr()) },
        NccStatus::DomainError,
    );
    assert_eq!(
        unsafe { ncc_ffft(17, input.as_ptr(), 3, false, out.as_mut_ptr()) },
        NccStatus::DomainError,
        "no order-3 root mod 17",
    );
    let high = [17u64];
    assert_eq!(
        unsafe { ncc_ffft(17, high.as_ptr(), 1, false, out.as_mut_ptr()) },
        NccStatus::InvalidInput,
    );
}

#[test]
fn inversion_audit_reports_the_block_counts() {
    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ncc_inversion_audit_json(8, 2, 4, 0.0625, 0, 0, &mut json) },
        NccStatus::Ok,
        "{}",
        last_error(),
    );
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["edges"], 32);
    assert_eq!(report["edge_bound"], 32);
    assert_eq!(report["all_correct"], true);
    assert_eq!(report["exhaustive"], true);

    let mut out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ncc_inversion_audit_json(8, 2, 0, 0.0625, 0, 0, &mut out) },
        NccStatus::InvalidInput,
    );
    assert_eq!(
        unsafe { ncc_inversion_audit_json(8, 0, 4, 0.0625, 0, 0, &mut out) },
        NccStatus::DomainError,
    );
}
