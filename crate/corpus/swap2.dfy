method swap2(a: int, b: int) returns (x: int, y: int)
  ensures x == b
  ensures y == a
{
  return b, a;
}
