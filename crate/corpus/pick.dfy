method pick(c: bool, a: int, b: int) returns (r: int)
  ensures c ==> r == a + 1
  ensures !c ==> r == b - 1
{
  if (c) {
    return a + 1;
  } else {
    return b - 1;
  }
}
