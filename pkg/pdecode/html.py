"""HTML template for pdecode reports + ansi2html """
from ansi2html import Ansi2HTMLConverter

html_template = """<!DOCTYPE HTML>
<html>
<head>
<meta charset="utf-8">
<meta http-equiv="Content-Type" content="text/html; charset=utf-8">
<title>%(title)s</title>
%(style)s
<style type="text/css">
body { background: #1c1c1c; margin: 2em; }
footer { color: #888; font-family: sans-serif; font-size: 12px; margin-top: 1em; }
</style>
</head>
<body>
<pre class="ansi2html-content">
%(content)s</pre>
<footer>
pdecode %(version)s, config %(config_hash)s
</footer>
</body>
</html>
"""


def to_html(text: str, title: str = "pdecode", version: str = "", config_hash: str = "") -> str:
    """ Convert a terminal report, colour escapes included, to a standalone page """
    converter = Ansi2HTMLConverter(dark_bg=True, title=title, font_size="14px")
    content = converter.convert(text, full=False)
    return html_template % {"title": title,
                            "style": converter.produce_headers(),
                            "content": content,
                            "version": version,
                            "config_hash": config_hash or "-"}


def write_html(path: str, text: str, **kwargs) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(to_html(text, **kwargs))
