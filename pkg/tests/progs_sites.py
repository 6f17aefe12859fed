"""Programs that call one library method from ``n`` differently-typed sites."""


def many_sites(n: int) -> str:
    calls = []
    for i in range(n):
        calls.append(f"    Item a{i} = new[a{i}] Item();")
        calls.append(f"    Item r{i} = lib.keep(a{i});")
    calls.append("    return lib.first;")
    body = "\n".join(calls)
    return f"""
class Item extends Object {{ }}
class Lib extends Object {{
  Item first;
  Lib rest;
  Item keep(Item x) {{
    this.first := x;
    Lib r = this.rest;
    if (r == null) {{ return x; }} else {{ return r.keep(x); }}
  }}
}}
class Main extends Object {{
  Item run() {{
    Lib lib = new[lib] Lib();
{body}
  }}
}}
"""
