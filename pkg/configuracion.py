"""
Configuración de la línea de comandos.

Orden de prioridad: valores por defecto < archivo JSON (--config) < flags
explícitos. La única variable de entorno es el directorio de salida por defecto,
que puede venir de un archivo .env.
"""
import logging
import os
from typing import Optional

from dotenv import load_dotenv

from errores import ErrorFormato, ErrorParametro
from espacio_curvas import N_PUNTOS_DEFECTO, PAD_DEFECTO, X_MAX_DEFECTO, MallaMadurez
from hjm import DT_DEFECTO, EPS_FD_DEFECTO, EPSILON_DEFECTO, HORIZONTE_DEFECTO
from io_curvas import leer_json

load_dotenv()

logger = logging.getLogger(__name__)

VARIABLE_DIR_SALIDA = "HJM_FDR_DIR_SALIDA"
DIR_SALIDA_DEFECTO = "resultados"

DEFECTOS = {
    "x_max": X_MAX_DEFECTO,
    "pad": PAD_DEFECTO,
    "n_points": N_PUNTOS_DEFECTO,
    "eps_fd": EPS_FD_DEFECTO,
    "epsilon": EPSILON_DEFECTO,
    "dt": DT_DEFECTO,
    "horizon": HORIZONTE_DEFECTO,
    "seed": 0,
    "paths": 100,
    "workers": 1,
}


def dir_salida() -> str:
    # Directorio protegido en .env; si no está, se usa ./resultados
    return os.getenv(VARIABLE_DIR_SALIDA) or DIR_SALIDA_DEFECTO


def ruta_salida(ruta: Optional[str], nombre: str) -> str:
    """La ruta pedida, o `nombre` dentro del directorio de salida por defecto."""
    return ruta if ruta else os.path.join(dir_salida(), nombre)


def cargar_archivo(ruta: str) -> dict:
    """Lee el JSON de configuración; una clave 'grid' se aplana a x_max, pad y n_points."""
    datos = leer_json(ruta)
    if not isinstance(datos, dict):
        raise ErrorFormato(f"{ruta}: la configuración debe ser un objeto JSON")
    datos = dict(datos)
    malla = datos.pop("grid", None)
    if malla is not None:
        if not isinstance(malla, dict):
            raise ErrorFormato(f"{ruta}: 'grid' debe ser un objeto con x_max, pad y n_points")
        for clave in ("x_max", "pad", "n_points"):
            if clave in malla:
                datos.setdefault(clave, malla[clave])
    # Los nombres de flag con guiones también se aceptan
    return {k.replace("-", "_"): v for k, v in datos.items()}


def combinar(flags: dict, archivo: Optional[str] = None) -> dict:
    """Defectos, luego el archivo, luego los flags que no sean None."""
    config = dict(DEFECTOS)
    if archivo:
        config.update(cargar_archivo(archivo))
        logger.info("Configuración leída de %s", archivo)
    config.update({k: v for k, v in flags.items() if v is not None})
    return config


def malla_desde_config(config: dict) -> MallaMadurez:
    try:
        return MallaMadurez(float(config["x_max"]), float(config["pad"]), int(config["n_points"]))
    except (TypeError, ValueError) as e:
        raise ErrorParametro(f"Malla inválida en la configuración: {e}")
