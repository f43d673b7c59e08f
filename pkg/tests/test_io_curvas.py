import os
import shutil
import tempfile
import unittest

import numpy as np

from errores import ErrorFormato, ErrorPadAgotado
from espacio_curvas import CurvaForward, MallaMadurez
from io_curvas import (a_json, escribir_curva, escribir_json, escribir_tabla, leer_curva,
                       leer_directorio_curvas, leer_json)


class TestCurvasCSV(unittest.TestCase):
    def setUp(self):
        self.directorio = tempfile.mkdtemp()
        self.malla = MallaMadurez(5.0, 1.0, 61)

    def tearDown(self):
        shutil.rmtree(self.directorio)

    def _archivo(self, nombre: str, texto: str) -> str:
        ruta = os.path.join(self.directorio, nombre)
        with open(ruta, "w", encoding="utf-8") as f:
            f.write(texto)
        return ruta

    def test_ida_y_vuelta(self):
        h = CurvaForward(self.malla, 0.03 + 0.01 * np.exp(-self.malla.nodos))
        ruta = os.path.join(self.directorio, "sub", "curva.csv")
        escribir_curva(h, ruta)
        leida = leer_curva(ruta, pad=1.0)
        self.assertEqual(leida.malla, self.malla)
        np.testing.assert_array_equal(leida.valores, h.valores)
        with open(ruta, encoding="utf-8") as f:
            self.assertEqual(f.readline().strip(), "x,rate")

    def test_cabecera(self):
        ruta = self._archivo("mala.csv", "x,r\n0,0.03\n0.1,0.03\n0.2,0.03\n")
        with self.assertRaises(ErrorFormato) as ctx:
            leer_curva(ruta)
        self.assertEqual(ctx.exception.linea, 1)

    def test_no_creciente(self):
        ruta = self._archivo("orden.csv", "x,rate\n0,0.03\n0.1,0.03\n0.1,0.03\n")
        with self.assertRaises(ErrorFormato) as ctx:
            leer_curva(ruta)
        self.assertEqual(ctx.exception.linea, 4)

    def test_no_numerico(self):
        ruta = self._archivo("texto.csv", "x,rate\n0,0.03\n0.1,abc\n0.2,0.03\n")
        with self.assertRaises(ErrorFormato) as ctx:
            leer_curva(ruta)
        self.assertEqual(ctx.exception.linea, 3)
        self.assertIn("línea 3", str(ctx.exception))

    def test_no_empieza_en_cero(self):
        ruta = self._archivo("inicio.csv", "x,rate\n0.1,0.03\n0.2,0.03\n0.3,0.03\n")
        with self.assertRaises(ErrorFormato):
            leer_curva(ruta)

    def test_archivo_inexistente_o_vacio(self):
        with self.assertRaises(ErrorFormato):
            leer_curva(os.path.join(self.directorio, "no_existe.csv"))
        with self.assertRaises(ErrorFormato):
            leer_curva(self._archivo("vacio.csv", ""))
        with self.assertRaises(ErrorFormato):
            leer_curva(self._archivo("solo_cabecera.csv", "x,rate\n"))

    def test_no_uniforme_con_y_sin_malla(self):
        x = np.r_[np.linspace(0.0, 3.0, 31), np.linspace(3.5, 6.0, 6)]
        ruta = os.path.join(self.directorio, "irregular.csv")
        escribir_tabla(ruta, {"x": x, "rate": 0.02 + 0.001 * x})
        with self.assertRaises(ErrorFormato):
            leer_curva(ruta)
        h = leer_curva(ruta, self.malla)
        np.testing.assert_allclose(h.valores, 0.02 + 0.001 * self.malla.nodos, atol=1e-12)
        with self.assertRaises(ErrorPadAgotado):
            leer_curva(ruta, MallaMadurez(5.0, 2.0, 71))

    def test_directorio(self):
        for nombre, nivel in (("b.csv", 0.02), ("a.csv", 0.01)):
            escribir_curva(CurvaForward.constante(self.malla, nivel), os.path.join(self.directorio, nombre))
        curvas = leer_directorio_curvas(self.directorio, self.malla)
        self.assertEqual([c.tasa_corta for c in curvas], [0.01, 0.02])
        vacio = os.path.join(self.directorio, "vacio")
        os.makedirs(vacio)
        with self.assertRaises(ErrorFormato):
            leer_directorio_curvas(vacio)
        with self.assertRaises(ErrorFormato):
            leer_directorio_curvas(os.path.join(self.directorio, "a.csv"))


class TestJSON(unittest.TestCase):
    def setUp(self):
        self.directorio = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directorio)

    def test_tipos_numpy_y_orden(self):
        texto = a_json({"b": np.float64(0.5), "a": np.arange(3), "c": np.bool_(True), "d": float("nan")})
        self.assertLess(texto.index('"a"'), texto.index('"b"'))
        self.assertIn('"d": null', texto)
        self.assertIn('"c": true', texto)

    def test_ida_y_vuelta(self):
        ruta = os.path.join(self.directorio, "r.json")
        escribir_json({"passes": np.bool_(False), "valores": np.array([1.0, 2.0])}, ruta)
        self.assertEqual(leer_json(ruta), {"passes": False, "valores": [1.0, 2.0]})

    def test_invalido(self):
        ruta = os.path.join(self.directorio, "malo.json")
        with open(ruta, "w", encoding="utf-8") as f:
            f.write('{\n  "a": 1,\n  "b": \n}\n')
        with self.assertRaises(ErrorFormato) as ctx:
            leer_json(ruta)
        self.assertEqual(ctx.exception.linea, 4)
        with self.assertRaises(ErrorFormato):
            leer_json(os.path.join(self.directorio, "no_existe.json"))


if __name__ == '__main__':
    unittest.main()
