use cgbounds::certificate::{certificate_gallery, printed_certificate, DualCertificate};
use cgbounds::format::{AnyGame, GameDoc, Sidecar};
use cgbounds::gallery::{generate, GenParams, GENERATORS};
use cgbounds::scalar::int;
use cgbounds::verify::{verify_dual_certificate, Status, VerifyOptions};

#[test]
fn every_generator_survives_json_and_self_checks() {
    for name in GENERATORS {
        let params = GenParams { n: Some(3), ..GenParams::default() };
        let inst = generate(name, &params).unwrap_or_else(|e| panic!("{name}: {e}"));
        let text = inst.doc.to_json();
        let back = GameDoc::from_json(&text).unwrap();
        assert_eq!(back, inst.doc, "{name}");
        let side: Sidecar = serde_json::from_value(serde_json::to_value(inst.sidecar()).unwrap()).unwrap();
        let (k, o) = side.profiles();
        assert_eq!((k, o), (inst.k.clone(), inst.o.clone()));
        let check = inst.self_check().unwrap();
        assert!(check.passed(), "{name}: {}", check.to_json());
        match back.to_any().unwrap() {
            AnyGame::Exact(g) => assert_eq!(g.players(), inst.k.len()),
            AnyGame::Float(g) => assert_eq!(g.players(), inst.k.len()),
        }
    }
}

#[test]
fn certificates_survive_json() {
    for (id, cert) in certificate_gallery(&int(0), 4) {
        let back = DualCertificate::from_json(&cert.to_json().to_string()).unwrap();
        assert_eq!(back, cert, "{id}");
    }
}

#[test]
fn printed_pos_multipliers_are_refuted() {
    for id in ["pos-quadratic", "pos-cubic"] {
        let cert = printed_certificate(id).unwrap();
        let v = verify_dual_certificate(&cert, &VerifyOptions::default()).unwrap();
        assert_eq!(v.status, Status::Refuted, "{id}");
        assert!(v.witness().is_some());
    }
}
