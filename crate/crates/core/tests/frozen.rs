//! Kernel and trace-distance values frozen from a 40-digit mpmath evaluation
//! (see `data/frozen.py`). The reference uses the cosh/sinh kernel forms with
//! complex square roots and a matrix-exponential evolution of the qubit pair.

#![allow(clippy::excessive_precision)]

use nmdis_core::channels::{nmad_kernel, rtn_kernel_with_derivative, Channel, ChannelChain, JcParams, NmadParams, RtnParams};
use nmdis_core::witnesses::pipeline_trace_distance;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs() + 1e-15
}

/// (a, γ, t, Λ, Λ')
const RTN: &[(f64, f64, f64, f64, f64)] = &[
    (5.0, 0.009, 0.5, 0.28152748250933191032, 9.5461976844424645895),
    (5.0, 0.009, 1.3, 0.89726745687261705347, -4.1527517504430175892),
    (5.0, 0.009, 2.7, -0.28427510923553204301, -9.3341958105029079652),
    (5.0, 0.009, 10.0, 0.78766483174568947157, 4.6281545568169482686),
    (5.0, 0.009, 33.3, 0.74100480621278471011, 0.066367805300412448818),
    (0.2, 5.0, 0.5, 0.99360314647458020671, -0.015814319405629957016),
    (0.2, 5.0, 1.3, 0.98095669853745502664, -0.01572046336505027847),
    (0.2, 5.0, 2.7, 0.9591930586655704714, -0.015371723173738155452),
    (0.2, 5.0, 10.0, 0.85329462519846553701, -0.013674628528342493399),
    (0.2, 5.0, 33.3, 0.58740027696578611735, -0.0094134901917193811593),
    (0.6, 0.05, 0.5, 0.82819318631812578399, -0.66091223203200007787),
    (0.6, 0.05, 1.3, 0.050461632834336275309, -1.1253752555575072396),
    (0.6, 0.05, 2.7, -0.87320467318345513282, 0.10016041082943124967),
    (0.6, 0.05, 10.0, 0.49461020145530309497, 0.39726175457538232929),
    (0.6, 0.05, 33.3, -0.10905051816586985681, -0.18014730975588984226),
    (0.5, 1.0, 0.5, 0.90979598956895013541, -0.3032653298563167118),
    (0.5, 1.0, 1.3, 0.62682312397822898718, -0.35429133094421638406),
    (0.5, 1.0, 2.7, 0.24866039713707413097, -0.18145488439732436584),
    (0.5, 1.0, 10.0, 0.00049939922738733336689, -0.00045399929762484851536),
    (0.5, 1.0, 33.3, 1.18382599632035282e-13, -1.1493121188766107553e-13),
];

/// (λ, γ_M, ω₀, ω_c, t, Re G, Im G)
const NMAD: &[(f64, f64, f64, f64, f64, f64, f64)] = &[
    (0.6, 100.0, 0.0, 0.0, 0.5, -0.64784720887859157996, 0.0),
    (0.6, 100.0, 0.0, 0.0, 1.3, 0.18832681567574503118, 0.0),
    (0.6, 100.0, 0.0, 0.0, 2.7, 0.34156109235020720023, 0.0),
    (0.6, 100.0, 0.0, 0.0, 10.0, -0.0023441694647796744868, 0.0),
    (0.6, 100.0, 0.0, 0.0, 33.3, 0.000045687379763056608923, 0.0),
    (10.0, 0.1, 0.0, 0.0, 0.5, 0.99001713673227511531, 0.0),
    (10.0, 0.1, 0.0, 0.0, 1.3, 0.97038155964732896612, 0.0),
    (10.0, 0.1, 0.0, 0.0, 2.7, 0.93692329861623982874, 0.0),
    (10.0, 0.1, 0.0, 0.0, 10.0, 0.78027223249603799967, 0.0),
    (10.0, 0.1, 0.0, 0.0, 33.3, 0.43514499515017657698, 0.0),
    (0.6, 100.0, 1.5, 0.5, 0.5, -0.62507635780547225293, -0.17070823498755746623),
    (0.6, 100.0, 1.5, 0.5, 1.3, 0.15907899326600859265, 0.10196547649435022388),
    (0.6, 100.0, 1.5, 0.5, 2.7, 0.066492514085858966566, 0.3352471978497643272),
    (0.6, 100.0, 1.5, 0.5, 10.0, 0.0025158316959863267285, 0.0031930994640047031315),
    (0.6, 100.0, 1.5, 0.5, 33.3, -0.000026735846047315014341, -0.000037990699621109190891),
    (2.0, 0.5, 0.0, 3.0, 0.5, 1.1653135133980718926, -0.07431358744408821165),
    (2.0, 0.5, 0.0, 3.0, 1.3, 1.5337075650626590975, -0.60710127684184502478),
    (2.0, 0.5, 0.0, 3.0, 2.7, 1.6115616241684010658, -2.3324716599144854945),
    (2.0, 0.5, 0.0, 3.0, 10.0, -30.454496434137895691, 36.424169952631193701),
    (2.0, 0.5, 0.0, 3.0, 33.3, 144326.35962099930294, -354642.52471946706956),
];

/// (t, noiseless, JC then RTN(a=5, γ=0.009), JC then NMAD(λ=0.6, γ_M=100))
const TD: &[(f64, f64, f64, f64)] = &[
    (0.5, 0.90718335822016003383, 0.78188879945429960092, 0.44827574263456831583),
    (1.3, 0.96621145921198177426, 0.86752548037639147349, 0.18148159054808180837),
    (2.7, 0.9223387456314968574, 0.82632672775773702689, 0.17436067848483730812),
    (10.0, 0.88973745694641139428, 0.82419137315055527772, 0.0012752835446950528163),
    (33.3, 0.95605771780843468832, 0.71130810535124318431, 0.000043463717368913481546),
];

#[test]
fn rtn_kernel_matches_reference() {
    for &(a, gamma, t, l, dl) in RTN {
        let (got, dgot) = rtn_kernel_with_derivative(t, &RtnParams::new(a, gamma).unwrap());
        assert!(close(got, l, 1e-12), "Λ a={a} γ={gamma} t={t}: {got} vs {l}");
        assert!(close(dgot, dl, 1e-10), "Λ' a={a} γ={gamma} t={t}: {dgot} vs {dl}");
    }
}

#[test]
fn nmad_kernel_matches_reference() {
    for &(lambda_width, gamma_m, omega_0, omega_c, t, re, im) in NMAD {
        let p = NmadParams { lambda_width, gamma_m, omega_0, omega_c };
        let g = nmad_kernel(t, &p);
        let scale = re.hypot(im);
        assert!((g.re - re).abs() <= 1e-12 * scale + 1e-15, "Re G {p:?} t={t}: {g}");
        assert!((g.im - im).abs() <= 1e-12 * scale + 1e-15, "Im G {p:?} t={t}: {g}");
    }
}

#[test]
fn pipeline_trace_distance_matches_reference() {
    let jc = Channel::Jc(JcParams::new(1.0).unwrap());
    let rtn = Channel::Rtn(RtnParams::new(5.0, 0.009).unwrap());
    let nmad = Channel::Nmad(NmadParams::resonant(0.6, 100.0).unwrap());
    let chains = [
        ChannelChain::new(vec![jc]),
        ChannelChain::new(vec![jc, rtn]),
        ChannelChain::new(vec![jc, nmad]),
    ];
    for &(t, d0, d_rtn, d_nmad) in TD {
        for (chain, want) in chains.iter().zip([d0, d_rtn, d_nmad]) {
            let got = pipeline_trace_distance(chain, t).unwrap();
            assert!(close(got, want, 1e-11), "t={t}: {got} vs {want}");
        }
    }
}
