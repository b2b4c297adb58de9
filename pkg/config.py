"""
Configuration for the trajectory planner
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    """Planner configuration"""

    # Default box bounds when an instance file omits [limits] keys
    DEFAULT_U_MIN = float(os.getenv("CAV_OCP_U_MIN", "-6.0"))
    DEFAULT_U_MAX = float(os.getenv("CAV_OCP_U_MAX", "1.4"))
    DEFAULT_V_MIN = float(os.getenv("CAV_OCP_V_MIN", "0.0"))
    DEFAULT_V_MAX = float(os.getenv("CAV_OCP_V_MAX", "21.0"))

    # Output
    SAMPLES = int(os.getenv("CAV_OCP_SAMPLES", "1000"))
    OUT_DIR = os.getenv("CAV_OCP_OUT_DIR", ".")

    # Verification and oracle
    VERIFY_TOL = float(os.getenv("CAV_OCP_VERIFY_TOL", "1e-6"))
    VERIFY_GRID = int(os.getenv("CAV_OCP_VERIFY_GRID", "10000"))
    GRID = int(os.getenv("CAV_OCP_GRID", "4000"))
    QP_SOLVER = os.getenv("CAV_OCP_QP_SOLVER", "CLARABEL")

    # Rear-end gap: standstill distance (m) + headway (s) * follower speed
    STANDSTILL = float(os.getenv("CAV_OCP_STANDSTILL", "5.0"))
    HEADWAY = float(os.getenv("CAV_OCP_HEADWAY", "0.5"))

    LOG_LEVEL = os.getenv("CAV_OCP_LOG_LEVEL", "WARNING").upper()

    @classmethod
    def default_limits(cls) -> dict:
        """Default bounds keyed like the [limits] section"""
        return {
            "u_min": cls.DEFAULT_U_MIN,
            "u_max": cls.DEFAULT_U_MAX,
            "v_min": cls.DEFAULT_V_MIN,
            "v_max": cls.DEFAULT_V_MAX,
        }

    @classmethod
    def print_config(cls):
        """Print current configuration"""
        print("\n" + "="*60)
        print("TRAJECTORY PLANNER CONFIGURATION")
        print("="*60)
        print(f"Default limits: u=[{cls.DEFAULT_U_MIN}, {cls.DEFAULT_U_MAX}] m/s^2, "
              f"v=[{cls.DEFAULT_V_MIN}, {cls.DEFAULT_V_MAX}] m/s")
        print(f"CSV samples: {cls.SAMPLES}")
        print(f"Output directory: {cls.OUT_DIR}")
        print(f"Verification: tol={cls.VERIFY_TOL}, grid={cls.VERIFY_GRID}")
        print(f"Oracle: grid={cls.GRID}, solver={cls.QP_SOLVER}")
        print(f"Rear-end gap: {cls.STANDSTILL} m + {cls.HEADWAY} s * speed")
        print(f"Log level: {cls.LOG_LEVEL}")
        print("="*60 + "\n")


if __name__ == "__main__":
    Config.print_config()
