# Physical constants in Hartree atomic units (hbar = m_e = e = 1).
# All conversion factors are the values used throughout the package; tests pin them.

# Speed of light in a.u. (inverse fine-structure constant).
C_AU = 137.035999

# One hartree in electron volts.
HARTREE_EV = 27.211386

# Peak intensity (W/cm^2) corresponding to a peak field of 1 a.u.
INTENSITY_AU_WCM2 = 3.509445e16

# Photon energy (a.u.) times wavelength (nm): E_au = WAVELENGTH_NM_AU / lambda_nm.
WAVELENGTH_NM_AU = 45.56335


def critical_field() -> float:
    """Schwinger-scale critical field c^3 in a.u. (field where pair effects saturate)."""
    return C_AU**3
