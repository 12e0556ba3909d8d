"""Length-prefixed binary framing shared by all serialized objects."""

import struct

from .errors import MalformedError


class Writer:
    def __init__(self):
        self._parts = []

    def raw(self, b):
        self._parts.append(bytes(b))
        return self

    def u8(self, n):
        return self.raw(struct.pack(">B", n))

    def u16(self, n):
        return self.raw(struct.pack(">H", n))

    def u32(self, n):
        return self.raw(struct.pack(">I", n))

    def u64(self, n):
        return self.raw(struct.pack(">Q", n))

    def blob(self, b):
        b = bytes(b)
        return self.u32(len(b)).raw(b)

    def text(self, s):
        return self.blob(s.encode("utf-8"))

    def getvalue(self):
        return b"".join(self._parts)


class Reader:
    def __init__(self, data, what="object"):
        self.data = memoryview(bytes(data))
        self.pos = 0
        self.what = what

    def _fail(self, msg):
        raise MalformedError(f"malformed {self.what}: {msg} (offset {self.pos})")

    def raw(self, n):
        if n < 0 or self.pos + n > len(self.data):
            self._fail("truncated")
        out = bytes(self.data[self.pos : self.pos + n])
        self.pos += n
        return out

    def u8(self):
        return self.raw(1)[0]

    def u16(self):
        return struct.unpack(">H", self.raw(2))[0]

    def u32(self):
        return struct.unpack(">I", self.raw(4))[0]

    def u64(self):
        return struct.unpack(">Q", self.raw(8))[0]

    def blob(self):
        return self.raw(self.u32())

    def text(self):
        try:
            return self.blob().decode("utf-8")
        except UnicodeDecodeError:
            self._fail("bad utf-8")

    def expect(self, prefix):
        if self.raw(len(prefix)) != prefix:
            self._fail("bad header")

    def element(self, group, kind):
        size = {"G1": 48, "G2": 96, "GT": 576}[kind]
        b = self.raw(size)
        try:
            return group.from_bytes(kind, b)
        except ValueError:
            self._fail(f"invalid {kind} element")

    def done(self):
        if self.pos != len(self.data):
            self._fail("trailing bytes")
