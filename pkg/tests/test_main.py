import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest

import main
from espacio_curvas import CurvaForward, MallaMadurez
from io_curvas import escribir_curva, escribir_json, leer_json
from lie import curvas_prueba
from volatilidad import EstructuraVolatilidad, Expresion


class TestLineaDeComandos(unittest.TestCase):
    def setUp(self):
        self.directorio = tempfile.mkdtemp()
        self.plana = os.path.join(self.directorio, "plana.csv")
        escribir_curva(CurvaForward.constante(MallaMadurez(), 0.03), self.plana)

    def tearDown(self):
        shutil.rmtree(self.directorio)

    def _ruta(self, nombre: str) -> str:
        return os.path.join(self.directorio, nombre)

    def _correr(self, *argv):
        salida, errores = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(salida), contextlib.redirect_stderr(errores):
            codigo = main.main(list(argv))
        return codigo, json.loads(salida.getvalue())

    def test_rango_tasa_corta(self):
        codigo, verdict = self._correr("rank-a3", "--forwards", "0", "--q", "2")
        self.assertEqual(codigo, 0)
        self.assertTrue(verdict["passes"])
        self.assertEqual(verdict["command"], "rank-a3")

    def test_rango_degenerado(self):
        codigo, verdict = self._correr("rank-a3", "--forwards", "0", "1", "--yields", "1", "--q", "1")
        self.assertEqual(codigo, 1)
        self.assertFalse(verdict["passes"])

    def test_parametro_faltante(self):
        codigo, verdict = self._correr("rank-a3", "--forwards", "0")
        self.assertEqual(codigo, 2)
        self.assertIn("q", verdict["error"])
        codigo, _ = self._correr("calibrate", "--model", "hwv", "--curve", self.plana, "--rho", "0.02")
        self.assertEqual(codigo, 2)

    def test_archivo_inexistente(self):
        codigo, verdict = self._correr("check-singular", "--curve", self._ruta("no.csv"), "--kind", "vasicek",
                                       "--beta", "0.5", "--rho", "0.02")
        self.assertEqual(codigo, 2)
        self.assertFalse(verdict["passes"])

    def test_uso_incorrecto(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main.main(["no-existe"])
        self.assertEqual(ctx.exception.code, 2)

    def test_riccati(self):
        csv = self._ruta("riccati.csv")
        reporte = self._ruta("reporte.json")
        codigo, verdict = self._correr("riccati-solve", "--a", "0", "--b", "0.5", "--out", csv,
                                       "--report", reporte)
        self.assertEqual(codigo, 0)
        self.assertEqual(verdict["kind"], "vasicek")
        self.assertTrue(os.path.exists(csv))
        self.assertEqual(leer_json(reporte), verdict)

    def test_riccati_explosion(self):
        codigo, verdict = self._correr("riccati-solve", "--a", "-2", "--b", "0", "--out", self._ruta("r.csv"))
        self.assertEqual(codigo, 1)
        self.assertIn("blow_up", verdict)

    def test_curva_plana_fuera_de_sigma(self):
        codigo, verdict = self._correr("check-singular", "--curve", self.plana, "--kind", "vasicek",
                                       "--beta", "0.5", "--rho", "0.02")
        self.assertEqual(codigo, 1)
        self.assertFalse(verdict["is_member"])

    def test_calibrar_y_simular(self):
        modelo = self._ruta("modelo.json")
        codigo, verdict = self._correr("calibrate", "--model", "hwv", "--curve", self.plana, "--beta", "0.5",
                                       "--rho", "0.02", "--horizon", "0.5", "--dt", "0.025", "--out", modelo)
        self.assertEqual(codigo, 0)
        self.assertEqual(leer_json(modelo)["model"], "hwv")
        codigo, verdict = self._correr("simulate", "--model", modelo, "--dt", "0.05", "--horizon", "0.5",
                                       "--paths", "20", "--seed", "1", "--out", self._ruta("sim.csv"))
        self.assertEqual(codigo, 0)
        self.assertEqual(verdict["floor_events"], 0)

    def test_lie_con_archivo_de_configuracion(self):
        config = self._ruta("config.json")
        with open(config, "w", encoding="utf-8") as f:
            json.dump({"svensson_alpha": 0.5}, f)
        codigo, verdict = self._correr("lie-check", "--config", config)
        self.assertEqual(codigo, 0)
        self.assertEqual(verdict["volatility"], "svensson")

    def test_lie_vol_desde_curvas(self):
        carpeta = self._ruta("curvas")
        for i, h in enumerate(curvas_prueba(MallaMadurez())[:3]):
            escribir_curva(h, os.path.join(carpeta, f"c{i}.csv"))
        vol = self._ruta("vol.json")
        escribir_json(EstructuraVolatilidad.local(Expresion.exponencial(0.02, -0.5)).a_dict(), vol)
        codigo, verdict = self._correr("lie-check", "--vol", vol, "--curves", carpeta)
        self.assertEqual(codigo, 0)
        self.assertEqual(len(verdict["residuals"]), 3)


if __name__ == '__main__':
    unittest.main()
