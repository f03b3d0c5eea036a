""" Registry of the parity-check matrices shipped with pdecode.
Configuration files may name one of these instead of giving a path. """
import os.path

_matrices_dir = os.path.join(os.path.dirname(__file__), "matrices")

bundled_codes = {'hamming74': os.path.join(_matrices_dir, "hamming_7_4.txt"),
                 'bch_15_7': os.path.join(_matrices_dir, "bch_15_7.txt"),
                 'bch_31_16': os.path.join(_matrices_dir, "bch_31_16.txt"),
                 'bch_31_15': os.path.join(_matrices_dir, "bch_31_15.txt"),
                 }
""" mapping code names used in configuration files to matrix files """

code_names = {'hamming74': "Hamming (7,4), systematic",
              'bch_15_7': "BCH (15,7), g(x) = x^8+x^7+x^6+x^4+1",
              # narrow-sense, designed distance 7
              'bch_31_16': "BCH (31,16), narrow-sense t=3",
              # the (31,16) code restricted to even-weight words
              'bch_31_15': "BCH (31,15), even-weight subcode of BCH (31,16)",
              }
""" Human readable names, echoed into reports """


def resolve_code_path(code: str) -> str:
    """ Return the matrix file for a bundled name, or `code` itself if it's a path """
    return bundled_codes.get(code, code)


def describe_code(code: str) -> str:
    return code_names.get(code, os.path.basename(code))
