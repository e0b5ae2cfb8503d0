import ast, json, sys

snippets = [
"x = 1\n",
"x, y = 1, 2\n",
"x = y = z = 0\n",
"x += 1\ny -= 2\nz *= 3\n",
"a = b // c % d\n",
"result = (1 + 2) * 3 ** 2\n",
"flag = not a and b or c\n",
"t = a if cond else b\n",
"s = 'hello' + \"world\"\n",
"s = f'value={x}'\n",
"b = b'bytes' * 3\n",
"items = [1, 2, 3]\n",
"d = {'a': 1, 'b': 2}\n",
"s = {1, 2, 3}\n",
"t = (1,)\n",
"empty = []\n",
"pair = ()\n",
"sub = items[1:3]\n",
"val = matrix[i][j]\n",
"sl = data[::2]\n",
"def f():\n    return 1\n",
"def g(a, b=2, *args, **kwargs):\n    return a + b\n",
"def h(a, *, kw=None):\n    pass\n",
"def ann(x: int, y: str = 'a') -> bool:\n    return True\n",
"lambda_f = lambda x, y=1: x + y\n",
"async def fetch(url):\n    data = await get(url)\n    return data\n",
"@decorator\ndef wrapped():\n    pass\n",
"@mod.attr(arg=1)\nclass C:\n    pass\n",
"class D(Base, metaclass=Meta):\n    attr = 1\n    def method(self):\n        return self.attr\n",
"if x > 0:\n    y = 1\nelif x < 0:\n    y = -1\nelse:\n    y = 0\n",
"while n > 0:\n    n -= 1\nelse:\n    done = True\n",
"for i in range(10):\n    if i % 2:\n        continue\n    total += i\nelse:\n    pass\n",
"for k, v in d.items():\n    print(k, v)\n",
"try:\n    risky()\nexcept ValueError as e:\n    handle(e)\nexcept Exception:\n    raise\nfinally:\n    cleanup()\n",
"with open('f') as fh, open('g') as gh:\n    data = fh.read()\n",
"import os\nimport sys as system\n",
"from os.path import join, split as sp\n",
"from . import sibling\n",
"def gen():\n    yield 1\n    yield from range(3)\n",
"squares = [x * x for x in range(10) if x % 2 == 0]\n",
"pairs = {k: v for k, v in items}\n",
"gen_exp = (x + 1 for x in data)\n",
"nested = [[y for y in row] for row in grid]\n",
"assert x == 1, 'must be one'\n",
"del items[0]\n",
"global counter\ncounter = 0\n",
"def outer():\n    x = 1\n    def inner():\n        nonlocal x\n        x += 1\n    inner()\n    return x\n",
"if (n := len(data)) > 10:\n    trim(data, n)\n",
"m = a @ b\nresult = m.T\n",
"x = 1; y = 2; z = x + y\n",
]

def in_string(src, idx):
    # crude scan: inside any quoted literal?
    q = None
    i = 0
    while i < idx:
        c = src[i]
        if q:
            if c == "\\":
                i += 1
            elif c == q:
                q = None
        elif c in "'\"":
            q = c
        i += 1
    return q is not None

def mutate(src):
    # delete one grammar-breaking token occurrence
    candidates = [":", ")", "]", "}", "def ", "in ", "import ", "as ", "lambda ", "=", ",", "-=", "*=", "if ", "else", "for ", "while ", "class ", "except", "finally", "with ", "del ", "assert ", "global ", "return", "yield ", "await "]
    for tok in candidates:
        idx = src.find(tok)
        while idx != -1:
            if in_string(src, idx):
                idx = src.find(tok, idx + 1)
                continue
            mutant = src[:idx] + src[idx + len(tok):]
            try:
                ast.parse(mutant)
            except SyntaxError:
                return mutant
            idx = src.find(tok, idx + 1)
    return None

valid, invalid = [], []
for i, s in enumerate(snippets):
    ast.parse(s)  # raises if our snippet is wrong
    valid.append({"id": f"valid_{i:03d}", "prompt_text": s})
    m = mutate(s)
    assert m is not None, f"no mutant for snippet {i}"
    try:
        ast.parse(m); raise AssertionError(f"mutant {i} still parses")
    except SyntaxError:
        pass
    invalid.append({"id": f"mutant_{i:03d}", "prompt_text": m})

assert len(valid) == 50 and len(invalid) == 50, (len(valid), len(invalid))
with open("/tmp/corpus/valid.jsonl", "w") as f:
    for r in valid: f.write(json.dumps(r) + "\n")
with open("/tmp/corpus/invalid.jsonl", "w") as f:
    for r in invalid: f.write(json.dumps(r) + "\n")
print("ok", len(valid), len(invalid))
