method max2(a: int, b: int) returns (r: int)
  ensures r >= a && r >= b
  ensures r == a || r == b
{
  if (a >= b) {
    return a;
  } else {
    return b;
  }
}
