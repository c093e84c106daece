#pragma once

// Frozen numerical references for the test suite.  Closed-form entries are
// hand-derived; spectra, integrals, and evolution endpoints were computed
// with an independent implementation (different language, different
// integrator) and pinned here so any silent behavior change trips a test.

namespace oracle {

// --- dressed pair at (Omega, Delta) = (10, 8) MHz, Gamma_line = 0.53 kHz
inline constexpr double kJPairMhz = -0.6822100702297362;
inline constexpr double kSingleShiftMhz = 2.403124237432849;
inline constexpr double kPairShiftMhz = 4.124038404635961;
inline constexpr double kAdmixtureSingle = 0.1876524762227878;
inline constexpr double kAdmixturePair = 0.2538170180413346;
inline constexpr double kGammaPairKhz = 0.1345230195619073;
inline constexpr double kKappa = 5071.325877544577;
inline constexpr double kDressedGapMhz = 16.24807680927192;

// --- benchmark chain, J_nn = 470 kHz, deltaE_total = 118.5 kHz
// n = 2: h~ = (87.875, 58.25), J~ = 117.5, offset = 28.625
inline constexpr double kChain2HTilde0 = 87.875;
inline constexpr double kChain2HTilde1 = 58.25;
inline constexpr double kChain2JTilde = 117.5;
inline constexpr double kChain2Offset = 28.625;
inline constexpr unsigned kChain2Ground = 1;  // "10"
inline constexpr double kChain2Energy = -147.125;
inline constexpr double kChain2Gap = 59.25;
// n = 3: ground "010" (index 2), E0 = -274.5, gap = 118.5/3
inline constexpr unsigned kChain3Ground = 2;
inline constexpr double kChain3Energy = -274.5;
inline constexpr double kChain3Gap = 39.5;
inline constexpr double kChain3Offset = 116.5;
// n = 4: ground "1010" (index 5), E0 = -382.125, gap = 118.5/4
inline constexpr unsigned kChain4Ground = 5;
inline constexpr double kChain4Energy = -382.125;
inline constexpr double kChain4Gap = 29.625;
inline constexpr double kChain4Offset = 204.375;

// --- schedule endpoints of the benchmark family (B_x = 470 kHz)
inline constexpr double kChainGapAtStart = 940.0;  // 2 B_x

// --- minimum instantaneous gaps along the linear ramp, n = 2..6 (kHz)
inline constexpr double kMinGap2 = 54.5288710842;
inline constexpr double kMinGap3 = 39.4641841246;
inline constexpr double kMinGap4 = 27.4486635548;
inline constexpr double kMinGap5 = 23.6923578687;
inline constexpr double kMinGap6 = 18.5074240639;
inline constexpr double kGapFitExponent = -0.9793932946;
inline constexpr double kGapFitPrefactorKhz = 110.24311533;

// --- evolution endpoints of the benchmark family (B_x = J = 470 kHz,
//     gamma_max = 0.1 kHz ramping with B(t), readout split 7/16)
inline constexpr double kClosed2T35 = 0.999041674133;
inline constexpr double kOpen2T35 = 0.996665182851;
inline constexpr double kLeak2T35 = 0.003493882140;
inline constexpr double kClosed3T90 = 0.991164136033;
inline constexpr double kOpen3T90 = 0.983086700752;
inline constexpr double kLeak3T90 = 0.013409283682;
inline constexpr double kClosed4T120 = 0.998671953591;
inline constexpr double kOpen4T120 = 0.982047368032;
inline constexpr double kLeak4T120 = 0.023714290242;

// --- n = 2 closed-system infidelity vs total time (criterion: monotone)
inline constexpr double kInfid2T35 = 9.5832581813e-04;
inline constexpr double kInfid2T70 = 1.5965452303e-04;
inline constexpr double kInfid2T140 = 3.7458468757e-05;
inline constexpr double kInfid2T280 = 9.2677728405e-06;

}  // namespace oracle
