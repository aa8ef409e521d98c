"""
Is it feasible with cesium?
===========================
"""
from fibersim.regime import cesium_d2, regime_report_json, saturation_for_excited_fraction

p = cesium_d2()
print(regime_report_json(p))

# at one percent excited population the pump coupling may reach ~1e5 1/s
low = cesium_d2(saturation=saturation_for_excited_fraction(1e-2, p.detuning))
print(regime_report_json(low, omega_k_requested=1e3))
